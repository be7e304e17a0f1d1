#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace streamlp {

/// Interns a name and returns a pointer that stays valid for the process lifetime.
/// Equal names yield the same pointer.
const std::string* intern(std::string_view name);

/// A ground term: an integer or a symbolic constant.
class Value {
public:
    Value() = default;

    static Value integer(std::int64_t n) {
        Value v;
        v.num_ = n;
        return v;
    }
    static Value symbol(std::string_view name) {
        Value v;
        v.sym_ = intern(name);
        return v;
    }
    static Value symbol(const std::string* interned) {
        Value v;
        v.sym_ = interned;
        return v;
    }

    bool is_integer() const { return sym_ == nullptr; }
    bool is_symbol() const { return sym_ != nullptr; }
    std::int64_t integer_value() const { return num_; }
    const std::string& symbol_name() const { return *sym_; }
    const std::string* symbol_ptr() const { return sym_; }

    friend bool operator==(const Value& a, const Value& b) { return a.sym_ == b.sym_ && a.num_ == b.num_; }

    // integers order before symbols; symbols order by name
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
        if (a.is_integer() != b.is_integer()) return a.is_integer() ? std::strong_ordering::less : std::strong_ordering::greater;
        if (a.is_integer()) return a.num_ <=> b.num_;
        if (a.sym_ == b.sym_) return std::strong_ordering::equal;
        int c = a.sym_->compare(*b.sym_);
        return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }

    std::size_t hash() const {
        auto h = std::hash<std::int64_t>{}(num_);
        return h ^ (std::hash<const void*>{}(sym_) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }

private:
    std::int64_t num_ = 0;
    const std::string* sym_ = nullptr;
};

std::string to_string(const Value& v);

inline void hash_combine(std::size_t& seed, std::size_t h) { seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2); }

}  // namespace streamlp

template <>
struct std::hash<streamlp::Value> {
    std::size_t operator()(const streamlp::Value& v) const noexcept { return v.hash(); }
};
