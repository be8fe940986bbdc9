#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mogplan/env/geometry.hpp"

namespace mogplan::env {

enum class TokenKind { Word, Space, Newline };

/// A run of the document string. Words are maximal non-whitespace runs, spaces are maximal
/// runs of ' ' / '\t', and each '\n' is its own token. Concatenating tokens in order gives
/// the document text back exactly.
struct Token {
  std::u32string text;
  TokenKind kind = TokenKind::Word;
  std::set<std::string> attrs;

  bool operator==(const Token&) const = default;
};

inline constexpr std::string_view kSelectedAttr = "selected";

class TextDocument {
 public:
  TextDocument() = default;
  explicit TextDocument(std::string_view utf8_text);

  static std::vector<Token> tokenize(std::u32string_view text);

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  std::string text() const;
  std::u32string text32() const;

  // Marks tokens [first, last] (inclusive) as selected and clears the mark everywhere else.
  void select(std::size_t first, std::size_t last);
  void clear_selection();
  bool has_selection() const;
  // Inclusive token range of the current selection, if any. Assumes a contiguous selection.
  std::pair<std::size_t, std::size_t> selection_range() const;
  std::string selected_text() const;

  void add_attr_to_selection(const std::string& attr);
  void remove_attr_from_selection(const std::string& attr);

  // Replaces tokens [first, last_exclusive) with freshly tokenized text (no attributes).
  void replace(std::size_t first, std::size_t last_exclusive, std::u32string_view text);
  void append(std::u32string_view text);
  void set_text(std::string_view utf8_text);

  bool operator==(const TextDocument&) const = default;

 private:
  std::vector<Token> tokens_;
};

/// One character placed on screen.
struct LaidOutChar {
  char32_t ch = 0;
  Rect box;
  int row = 0;
  std::size_t token = 0;
  std::size_t offset = 0;  // index into the document's code points

  bool operator==(const LaidOutChar&) const = default;
};

/// Monospace layout geometry for a document viewport.
struct TextLayout {
  Rect area;
  int char_width = 10;
  int char_height = 20;
  int scroll_rows = 0;

  // One column is reserved at the right edge so a newline cell always fits.
  int columns() const { return area.width / char_width - 1; }
  int visible_rows() const { return area.height / char_height; }

  bool operator==(const TextLayout&) const = default;
};

/// Lays out every character (including spaces and newlines) in reading order with greedy word
/// wrap. Words longer than a line break at the line end. Boxes are in screen pixels for the
/// current scroll offset; rows outside the viewport still get rows but are filtered by
/// `visible_chars`.
std::vector<LaidOutChar> layout_document(const TextDocument& doc, const TextLayout& layout);
std::vector<LaidOutChar> visible_chars(const TextDocument& doc, const TextLayout& layout);

int total_rows(const TextDocument& doc, const TextLayout& layout);

}  // namespace mogplan::env
