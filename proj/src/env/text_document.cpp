#include "mogplan/env/text_document.hpp"

#include <algorithm>

#include "mogplan/core/utf8.hpp"

namespace mogplan::env {

namespace {

TokenKind classify(char32_t ch) {
  if (ch == U'\n') return TokenKind::Newline;
  if (ch == U' ' || ch == U'\t' || ch == U'\r') return TokenKind::Space;
  return TokenKind::Word;
}

}  // namespace

TextDocument::TextDocument(std::string_view utf8_text) { set_text(utf8_text); }

std::vector<Token> TextDocument::tokenize(std::u32string_view text) {
  std::vector<Token> tokens;
  for (char32_t ch : text) {
    const TokenKind kind = classify(ch);
    if (kind != TokenKind::Newline && !tokens.empty() && tokens.back().kind == kind) {
      tokens.back().text.push_back(ch);
    } else {
      tokens.push_back(Token{std::u32string(1, ch), kind, {}});
    }
  }
  return tokens;
}

std::u32string TextDocument::text32() const {
  std::u32string out;
  for (const auto& t : tokens_) out += t.text;
  return out;
}

std::string TextDocument::text() const { return utf8::encode(text32()); }

void TextDocument::select(std::size_t first, std::size_t last) {
  const std::string attr(kSelectedAttr);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i >= first && i <= last)
      tokens_[i].attrs.insert(attr);
    else
      tokens_[i].attrs.erase(attr);
  }
}

void TextDocument::clear_selection() {
  const std::string attr(kSelectedAttr);
  for (auto& t : tokens_) t.attrs.erase(attr);
}

bool TextDocument::has_selection() const {
  const std::string attr(kSelectedAttr);
  return std::any_of(tokens_.begin(), tokens_.end(),
                     [&](const Token& t) { return t.attrs.count(attr) != 0; });
}

std::pair<std::size_t, std::size_t> TextDocument::selection_range() const {
  const std::string attr(kSelectedAttr);
  std::size_t first = tokens_.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].attrs.count(attr)) {
      first = std::min(first, i);
      last = i;
    }
  }
  return {first, last};
}

std::string TextDocument::selected_text() const {
  if (!has_selection()) return {};
  const auto [first, last] = selection_range();
  std::u32string out;
  for (std::size_t i = first; i <= last; ++i) out += tokens_[i].text;
  return utf8::encode(out);
}

void TextDocument::add_attr_to_selection(const std::string& attr) {
  const std::string sel(kSelectedAttr);
  for (auto& t : tokens_)
    if (t.attrs.count(sel)) t.attrs.insert(attr);
}

void TextDocument::remove_attr_from_selection(const std::string& attr) {
  const std::string sel(kSelectedAttr);
  if (attr == sel) return;
  for (auto& t : tokens_)
    if (t.attrs.count(sel)) t.attrs.erase(attr);
}

void TextDocument::replace(std::size_t first, std::size_t last_exclusive, std::u32string_view text) {
  first = std::min(first, tokens_.size());
  last_exclusive = std::clamp(last_exclusive, first, tokens_.size());
  // Re-tokenize across the seams so adjacent runs of the same kind merge.
  std::u32string merged;
  std::size_t lo = first;
  std::size_t hi = last_exclusive;
  if (lo > 0 && tokens_[lo - 1].attrs.empty()) merged += tokens_[--lo].text;
  merged += text;
  if (hi < tokens_.size() && tokens_[hi].attrs.empty()) merged += tokens_[hi++].text;
  auto fresh = tokenize(merged);
  tokens_.erase(tokens_.begin() + static_cast<std::ptrdiff_t>(lo),
                tokens_.begin() + static_cast<std::ptrdiff_t>(hi));
  tokens_.insert(tokens_.begin() + static_cast<std::ptrdiff_t>(lo), fresh.begin(), fresh.end());
}

void TextDocument::append(std::u32string_view text) { replace(tokens_.size(), tokens_.size(), text); }

void TextDocument::set_text(std::string_view utf8_text) { tokens_ = tokenize(utf8::decode(utf8_text)); }

std::vector<LaidOutChar> layout_document(const TextDocument& doc, const TextLayout& layout) {
  std::vector<LaidOutChar> out;
  const int cols = std::max(1, layout.columns());
  int row = 0;
  int col = 0;
  std::size_t offset = 0;
  auto place = [&](char32_t ch, std::size_t token) {
    LaidOutChar c;
    c.ch = ch;
    c.row = row;
    c.token = token;
    c.offset = offset++;
    c.box = Rect{layout.area.x + col * layout.char_width,
                 layout.area.y + (row - layout.scroll_rows) * layout.char_height, layout.char_width,
                 layout.char_height};
    out.push_back(c);
  };
  const auto& tokens = doc.tokens();
  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    const Token& tok = tokens[ti];
    switch (tok.kind) {
      case TokenKind::Newline:
        place(tok.text.front(), ti);
        ++row;
        col = 0;
        break;
      case TokenKind::Space:
        for (char32_t ch : tok.text) {
          if (col >= cols) {
            ++row;
            col = 0;
          }
          place(ch, ti);
          ++col;
        }
        break;
      case TokenKind::Word: {
        const int len = static_cast<int>(tok.text.size());
        if (col > 0 && col + len > cols && len <= cols) {
          ++row;
          col = 0;
        }
        for (char32_t ch : tok.text) {
          if (col >= cols) {
            ++row;
            col = 0;
          }
          place(ch, ti);
          ++col;
        }
        break;
      }
    }
  }
  return out;
}

std::vector<LaidOutChar> visible_chars(const TextDocument& doc, const TextLayout& layout) {
  auto all = layout_document(doc, layout);
  const int first = layout.scroll_rows;
  const int last = layout.scroll_rows + layout.visible_rows();
  std::vector<LaidOutChar> out;
  for (auto& c : all)
    if (c.row >= first && c.row < last) out.push_back(c);
  return out;
}

int total_rows(const TextDocument& doc, const TextLayout& layout) {
  const auto all = layout_document(doc, layout);
  if (all.empty()) return 0;
  return all.back().row + 1;
}

}  // namespace mogplan::env
