#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mogplan::grounding {

/// A spreadsheet cell. Column and row are 0-based; the A1 text form is 1-based for rows.
struct CellAddress {
  std::optional<std::string> sheet;
  int column = 0;
  int row = 0;

  bool operator==(const CellAddress&) const = default;
};

// Largest accepted index for either axis; keeps 1-based row text within int.
inline constexpr int kMaxCellIndex = 2'147'483'646;

/// "A" -> 0, "Z" -> 25, "AA" -> 26. Throws Error(BadAddress) on anything but uppercase ASCII
/// letters, and on overflow.
int column_index(std::string_view letters);
std::string column_label(int column);

/// Parses `[Sheet!]LETTERS DIGITS`. Leading zeros in the row are tolerated and dropped by
/// format_a1. Throws Error(BadAddress).
CellAddress parse_a1(std::string_view text);
std::string format_a1(const CellAddress& address);

std::optional<CellAddress> try_parse_a1(std::string_view text);

}  // namespace mogplan::grounding
