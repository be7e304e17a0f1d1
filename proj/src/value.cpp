#include "streamlp/value.hpp"

#include <mutex>
#include <unordered_set>

namespace streamlp {

const std::string* intern(std::string_view name) {
    static std::mutex mutex;
    static std::unordered_set<std::string> names;  // node-based: element addresses are stable
    std::lock_guard lock(mutex);
    auto it = names.find(std::string(name));
    if (it == names.end()) it = names.emplace(name).first;
    return &*it;
}

std::string to_string(const Value& v) {
    return v.is_integer() ? std::to_string(v.integer_value()) : v.symbol_name();
}

}  // namespace streamlp
