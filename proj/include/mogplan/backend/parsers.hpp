#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mogplan/backend/action.hpp"

namespace mogplan {

/// Extracts the last syntactically valid action call from model output.
///
/// Grammar: `name(arg=value, ...)` where a value is a string ("..." or '...'), an integer, a
/// decimal number, a boolean (true/false/True/False), a list of strings, or a string-to-string
/// map. Names and argument names must belong to the action space; missing required arguments,
/// unknown or duplicate arguments and wrongly typed values are errors. Text before and after the
/// call (reasoning, code fences) is ignored, and calls nested inside string literals of an
/// earlier valid call are skipped.
///
/// Throws ParseError. When no valid call exists, the error reported is the one from the last
/// call that named a known action, falling back to an unknown-action or no-call error.
Action parse_action_call(std::string_view text);

/// Extracts the first numbered ("1." / "1)") or bulleted ("-", "*", "+", "•") block, one item
/// per line, trimmed, empty items dropped. Throws Error(EmptyPlan) when no list is present.
std::vector<std::string> parse_plan(std::string_view text);

}  // namespace mogplan
