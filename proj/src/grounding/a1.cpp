#include "mogplan/grounding/a1.hpp"

#include <cstdint>

#include "mogplan/core/error.hpp"

namespace mogplan::grounding {

namespace {

[[noreturn]] void bad_address(std::string_view text, const char* why) {
  throw Error(ErrorKind::BadAddress, "\"" + std::string(text) + "\": " + why);
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

int column_index(std::string_view letters) {
  if (letters.empty()) bad_address(letters, "missing column letters");
  std::int64_t value = 0;
  for (char c : letters) {
    if (!is_upper(c)) bad_address(letters, "column must be uppercase letters");
    // Bijective base-26: A=1 ... Z=26.
    value = value * 26 + (c - 'A' + 1);
    if (value - 1 > kMaxCellIndex) bad_address(letters, "column out of range");
  }
  return static_cast<int>(value - 1);
}

std::string column_label(int column) {
  if (column < 0) throw Error(ErrorKind::BadAddress, "negative column index");
  std::string label;
  std::int64_t n = static_cast<std::int64_t>(column) + 1;
  while (n > 0) {
    const auto rem = (n - 1) % 26;
    label.insert(label.begin(), static_cast<char>('A' + rem));
    n = (n - 1) / 26;
  }
  return label;
}

CellAddress parse_a1(std::string_view text) {
  CellAddress address;
  std::string_view ref = text;
  if (const auto bang = text.find('!'); bang != std::string_view::npos) {
    if (bang == 0) bad_address(text, "empty sheet name");
    address.sheet = std::string(text.substr(0, bang));
    ref = text.substr(bang + 1);
  }
  std::size_t split = 0;
  while (split < ref.size() && is_upper(ref[split])) ++split;
  if (split == 0) bad_address(text, "expected column letters");
  if (split == ref.size()) bad_address(text, "expected row number");
  std::int64_t row = 0;
  for (std::size_t i = split; i < ref.size(); ++i) {
    if (!is_digit(ref[i])) bad_address(text, "row must be decimal digits");
    row = row * 10 + (ref[i] - '0');
    if (row - 1 > kMaxCellIndex) bad_address(text, "row out of range");
  }
  if (row == 0) bad_address(text, "rows start at 1");
  address.column = column_index(ref.substr(0, split));
  address.row = static_cast<int>(row - 1);
  return address;
}

std::string format_a1(const CellAddress& address) {
  if (address.row < 0 || address.row > kMaxCellIndex || address.column > kMaxCellIndex)
    throw Error(ErrorKind::BadAddress, "cell index out of range");
  std::string out;
  if (address.sheet) {
    if (address.sheet->empty() || address.sheet->find('!') != std::string::npos)
      throw Error(ErrorKind::BadAddress, "invalid sheet name \"" + *address.sheet + "\"");
    out = *address.sheet + "!";
  }
  out += column_label(address.column);
  out += std::to_string(static_cast<std::int64_t>(address.row) + 1);
  return out;
}

std::optional<CellAddress> try_parse_a1(std::string_view text) {
  try {
    return parse_a1(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace mogplan::grounding
