#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamlp/program.hpp"

namespace streamlp {

/// One `#volatile` sub-block (or the leading accumulating block) of an online event.
struct OnlineBlock {
    std::optional<std::int64_t> life;  // nullopt: accumulating (never expires)
    std::vector<Rule> rules;           // ground
    friend bool operator==(const OnlineBlock&, const OnlineBlock&) = default;
};

/// One online input: everything from `#step i [: delta].` up to `#endstep.`
struct StreamEvent {
    std::int64_t target_step = 0;
    std::optional<std::int64_t> delta;  // nullopt: unbounded
    std::vector<OnlineBlock> blocks;
    std::optional<std::int64_t> forget_upto;
    friend bool operator==(const StreamEvent&, const StreamEvent&) = default;
};

std::string to_string(const StreamEvent& e);

Program parse_program(std::string_view text);

/// Parses exactly one event. `#endstep.` is optional at the end of `text`.
/// When `previous_step` is given, the event's step must be strictly greater.
StreamEvent parse_stream_block(std::string_view text, std::optional<std::int64_t> previous_step = std::nullopt);

/// Parses a whole stream file: a sequence of `#endstep.`-terminated blocks.
std::vector<StreamEvent> parse_stream(std::string_view text);

/// Splits raw stream text into block texts (each including its terminator).
/// A block is also closed by the next `#step`; trailing text without
/// terminator is returned as the last element if non-blank.
std::vector<std::string> split_stream_blocks(std::string_view text);

}  // namespace streamlp
