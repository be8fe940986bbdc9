#include "mogplan/backend/parsers.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <variant>

#include "mogplan/core/error.hpp"

namespace mogplan {

namespace {

using StringMap = std::vector<std::pair<std::string, std::string>>;
using Value = std::variant<std::string, long long, double, bool, std::vector<std::string>, StringMap>;

enum class ArgType { Str, Int, Bool, StrList, StrMap, Number };

struct ArgSpec {
  std::string_view name;
  ArgType type;
  bool required;
};

std::vector<ArgSpec> schema(ActionKind kind) {
  using enum ArgType;
  switch (kind) {
    case ActionKind::Click:
      return {{"element_description", Str, true}, {"num_clicks", Int, false}, {"button_type", Str, false},
              {"hold_keys", StrList, false}};
    case ActionKind::Type:
      return {{"element_description", Str, true}, {"text", Str, true}, {"overwrite", Bool, false},
              {"enter", Bool, false}};
    case ActionKind::Scroll:
      return {{"element_description", Str, true}, {"clicks", Int, true}, {"shift", Bool, false}};
    case ActionKind::Hotkey:
      return {{"keys", StrList, true}};
    case ActionKind::HoldAndPress:
      return {{"hold_keys", StrList, true}, {"press_keys", StrList, true}};
    case ActionKind::DragAndDrop:
      return {{"element_description_1", Str, true}, {"element_description_2", Str, true},
              {"hold_keys", StrList, false}};
    case ActionKind::SaveToKnowledge:
      return {{"text", Str, true}};
    case ActionKind::SwitchApplications:
      return {{"app_name", Str, true}};
    case ActionKind::HighlightTextSpan:
      return {{"starting_phrase", Str, true}, {"ending_phrase", Str, true}};
    case ActionKind::SetCellValues:
      return {{"cell_values", StrMap, true}, {"app_name", Str, true}, {"sheet_name", Str, true}};
    case ActionKind::Wait:
      return {{"time", Number, true}};
    case ActionKind::Done:
    case ActionKind::Fail:
      return {};
  }
  return {};
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

class CallParser {
 public:
  CallParser(std::string_view text, std::size_t pos) : s_(text), pos_(pos) {}

  std::size_t pos() const { return pos_; }

  // Expects the cursor on the identifier. Returns the action; end position via pos().
  Action parse_call(ActionKind kind) {
    ident();
    skip_ws();
    expect('(');
    std::vector<std::pair<std::string, std::pair<Value, std::size_t>>> args;
    skip_ws();
    if (peek() != ')') {
      for (;;) {
        skip_ws();
        const std::size_t at = pos_;
        if (!is_ident_start(peek())) {
          const char c = peek();
          if (c == '"' || c == '\'' || c == '[' || c == '{' || c == '-' || (c >= '0' && c <= '9'))
            fail(at, "positional arguments are not supported; name each argument");
          fail(at, "expected argument name");
        }
        std::string name = ident();
        skip_ws();
        if (peek() != '=') {
          if (peek() == ',' || peek() == ')' || peek() == '"' || peek() == '\'')
            fail(at, "positional arguments are not supported; use " + name + "=value");
          fail(pos_, "expected '=' after argument name '" + name + "'");
        }
        ++pos_;
        skip_ws();
        const std::size_t value_at = pos_;
        Value v = value();
        args.push_back({std::move(name), {std::move(v), value_at}});
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
          if (peek() == ')') break;  // trailing comma
          continue;
        }
        if (peek() == ')') break;
        fail(pos_, "expected ',' or ')'");
      }
    }
    expect(')');
    return build(kind, args);
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& why) const { throw ParseError(at, why); }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && is_ws(s_[pos_])) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string string_literal() {
    const char quote = s_[pos_];
    const std::size_t start = pos_++;
    std::string out;
    while (pos_ < s_.size()) {
      char c = s_[pos_++];
      if (c == quote) return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) break;
      char e = s_[pos_++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case '\\': out.push_back('\\'); break;
        case '/': out.push_back('/'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'x': {
          if (pos_ + 2 > s_.size()) fail(pos_, "truncated \\x escape");
          const int hi = hex_digit(s_[pos_]);
          const int lo = hex_digit(s_[pos_ + 1]);
          if (hi < 0 || lo < 0) fail(pos_, "invalid \\x escape");
          out.push_back(static_cast<char>(hi * 16 + lo));
          pos_ += 2;
          break;
        }
        default:
          fail(pos_ - 2, std::string("unknown escape \\") + e);
      }
    }
    fail(start, "unterminated string");
  }

  Value number() {
    const std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    bool is_float = false;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c >= '0' && c <= '9') {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        ++pos_;
        if ((c == 'e' || c == 'E') && (peek() == '-' || peek() == '+')) ++pos_;
      } else {
        break;
      }
    }
    std::string_view lit = s_.substr(start, pos_ - start);
    if (!lit.empty() && lit.front() == '+') lit.remove_prefix(1);
    const char* end = lit.data() + lit.size();
    if (is_float) {
      double d = 0;
      auto [p, ec] = std::from_chars(lit.data(), end, d);
      if (ec != std::errc() || p != end || !std::isfinite(d)) fail(start, "invalid number");
      return d;
    }
    long long n = 0;
    auto [p, ec] = std::from_chars(lit.data(), end, n);
    if (ec != std::errc() || p != end) fail(start, "invalid integer");
    return n;
  }

  Value value() {
    const char c = peek();
    if (c == '"' || c == '\'') return string_literal();
    if (c == '[') {
      ++pos_;
      std::vector<std::string> items;
      skip_ws();
      while (peek() != ']') {
        if (peek() != '"' && peek() != '\'') fail(pos_, "list items must be strings");
        items.push_back(string_literal());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
        } else if (peek() != ']') {
          fail(pos_, "expected ',' or ']'");
        }
      }
      ++pos_;
      return items;
    }
    if (c == '{') {
      ++pos_;
      StringMap map;
      skip_ws();
      while (peek() != '}') {
        if (peek() != '"' && peek() != '\'') fail(pos_, "map keys must be strings");
        std::string key = string_literal();
        skip_ws();
        expect(':');
        skip_ws();
        if (peek() != '"' && peek() != '\'') fail(pos_, "map values must be strings");
        std::string val = string_literal();
        map.emplace_back(std::move(key), std::move(val));
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
        } else if (peek() != '}') {
          fail(pos_, "expected ',' or '}'");
        }
      }
      ++pos_;
      return map;
    }
    if (c == '-' || c == '+' || (c >= '0' && c <= '9')) return number();
    if (is_ident_start(c)) {
      const std::size_t at = pos_;
      const std::string word = ident();
      if (word == "true" || word == "True") return true;
      if (word == "false" || word == "False") return false;
      fail(at, "unexpected identifier '" + word + "'");
    }
    fail(pos_, "expected a value");
  }

  static const char* type_name(ArgType t) {
    switch (t) {
      case ArgType::Str: return "a string";
      case ArgType::Int: return "an integer";
      case ArgType::Bool: return "a boolean";
      case ArgType::StrList: return "a list of strings";
      case ArgType::StrMap: return "a string-to-string map";
      case ArgType::Number: return "a number";
    }
    return "a value";
  }

  Action build(ActionKind kind,
               const std::vector<std::pair<std::string, std::pair<Value, std::size_t>>>& args) const {
    const auto specs = schema(kind);
    std::set<std::string> seen;
    for (const auto& [name, vp] : args) {
      const auto& [v, at] = vp;
      const ArgSpec* spec = nullptr;
      for (const auto& s : specs)
        if (s.name == name) spec = &s;
      if (!spec)
        fail(at, "unknown argument '" + name + "' for " + std::string(action_name(kind)));
      if (!seen.insert(name).second) fail(at, "duplicate argument '" + name + "'");
      bool ok = false;
      switch (spec->type) {
        case ArgType::Str: ok = std::holds_alternative<std::string>(v); break;
        case ArgType::Int: ok = std::holds_alternative<long long>(v); break;
        case ArgType::Bool: ok = std::holds_alternative<bool>(v); break;
        case ArgType::StrList: ok = std::holds_alternative<std::vector<std::string>>(v); break;
        case ArgType::StrMap: ok = std::holds_alternative<StringMap>(v); break;
        case ArgType::Number:
          ok = std::holds_alternative<double>(v) || std::holds_alternative<long long>(v);
          break;
      }
      if (!ok) fail(at, "argument '" + name + "' must be " + type_name(spec->type));
    }
    for (const auto& s : specs)
      if (s.required && !seen.count(std::string(s.name)))
        fail(pos_, "missing required argument '" + std::string(s.name) + "' for " +
                       std::string(action_name(kind)));

    auto find = [&](std::string_view name) -> std::pair<const Value*, std::size_t> {
      for (const auto& [n, vp] : args)
        if (n == name) return {&vp.first, vp.second};
      return {nullptr, 0};
    };
    auto str = [&](std::string_view name, std::string& out, bool non_empty) {
      auto [v, at] = find(name);
      if (!v) return;
      out = std::get<std::string>(*v);
      if (non_empty && out.find_first_not_of(" \t\r\n") == std::string::npos)
        fail(at, "argument '" + std::string(name) + "' must be non-empty");
    };
    auto boolean = [&](std::string_view name, bool& out) {
      if (auto [v, at] = find(name); v) out = std::get<bool>(*v);
    };
    auto keys = [&](std::string_view name, std::vector<std::string>& out, bool non_empty) {
      auto [v, at] = find(name);
      if (!v) return;
      out = std::get<std::vector<std::string>>(*v);
      if (non_empty && out.empty()) fail(at, "argument '" + std::string(name) + "' must list at least one key");
      for (const auto& k : out)
        if (k.empty()) fail(at, "argument '" + std::string(name) + "' contains an empty key");
    };
    auto integer = [&](std::string_view name, int& out) {
      auto [v, at] = find(name);
      if (!v) return;
      const long long n = std::get<long long>(*v);
      if (n < -1'000'000 || n > 1'000'000) fail(at, "argument '" + std::string(name) + "' is out of range");
      out = static_cast<int>(n);
    };

    switch (kind) {
      case ActionKind::Click: {
        actions::Click a;
        str("element_description", a.element_description, true);
        integer("num_clicks", a.num_clicks);
        if (a.num_clicks < 1) fail(find("num_clicks").second, "num_clicks must be at least 1");
        str("button_type", a.button_type, true);
        if (a.button_type != "left" && a.button_type != "right" && a.button_type != "middle")
          fail(find("button_type").second, "button_type must be left, right or middle");
        keys("hold_keys", a.hold_keys, false);
        return a;
      }
      case ActionKind::Type: {
        actions::Type a;
        str("element_description", a.element_description, true);
        str("text", a.text, false);
        boolean("overwrite", a.overwrite);
        boolean("enter", a.enter);
        return a;
      }
      case ActionKind::Scroll: {
        actions::Scroll a;
        str("element_description", a.element_description, true);
        integer("clicks", a.clicks);
        boolean("shift", a.shift);
        return a;
      }
      case ActionKind::Hotkey: {
        actions::Hotkey a;
        keys("keys", a.keys, true);
        return a;
      }
      case ActionKind::HoldAndPress: {
        actions::HoldAndPress a;
        keys("hold_keys", a.hold_keys, true);
        keys("press_keys", a.press_keys, true);
        return a;
      }
      case ActionKind::DragAndDrop: {
        actions::DragAndDrop a;
        str("element_description_1", a.element_description_1, true);
        str("element_description_2", a.element_description_2, true);
        keys("hold_keys", a.hold_keys, false);
        return a;
      }
      case ActionKind::SaveToKnowledge: {
        actions::SaveToKnowledge a;
        str("text", a.text, false);
        return a;
      }
      case ActionKind::SwitchApplications: {
        actions::SwitchApplications a;
        str("app_name", a.app_name, true);
        return a;
      }
      case ActionKind::HighlightTextSpan: {
        actions::HighlightTextSpan a;
        str("starting_phrase", a.starting_phrase, true);
        str("ending_phrase", a.ending_phrase, true);
        return a;
      }
      case ActionKind::SetCellValues: {
        actions::SetCellValues a;
        auto [v, at] = find("cell_values");
        a.cell_values = std::get<StringMap>(*v);
        if (a.cell_values.empty()) fail(at, "cell_values must not be empty");
        std::set<std::string> keys_seen;
        for (const auto& [k, _] : a.cell_values)
          if (!keys_seen.insert(k).second) fail(at, "duplicate cell key \"" + k + "\"");
        str("app_name", a.app_name, true);
        str("sheet_name", a.sheet_name, true);
        return a;
      }
      case ActionKind::Wait: {
        actions::Wait a;
        auto [v, at] = find("time");
        a.time = std::holds_alternative<double>(*v) ? std::get<double>(*v)
                                                    : static_cast<double>(std::get<long long>(*v));
        if (a.time < 0) fail(at, "time must be non-negative");
        return a;
      }
      case ActionKind::Done: return actions::Done{};
      case ActionKind::Fail: return actions::Fail{};
    }
    fail(pos_, "unsupported action");
  }

  std::string_view s_;
  std::size_t pos_;
};

// `name(` with `)` or `ident=` next: looks like a call rather than prose in parentheses.
bool looks_like_keyword_call(std::string_view s, std::size_t after_paren) {
  std::size_t i = after_paren;
  while (i < s.size() && is_ws(s[i])) ++i;
  if (i < s.size() && s[i] == ')') return true;
  if (i >= s.size() || !is_ident_start(s[i])) return false;
  while (i < s.size() && is_ident(s[i])) ++i;
  while (i < s.size() && is_ws(s[i])) ++i;
  return i < s.size() && s[i] == '=';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

// Returns the item text if `line` is a list item.
std::optional<std::string_view> list_item(std::string_view line) {
  line = trim(line);
  if (line.empty()) return std::nullopt;
  std::size_t i = 0;
  if (line[0] >= '0' && line[0] <= '9') {
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    if (i >= line.size() || (line[i] != '.' && line[i] != ')')) return std::nullopt;
    ++i;
  } else if (line[0] == '-' || line[0] == '*' || line[0] == '+') {
    i = 1;
  } else if (line.substr(0, 3) == "\xE2\x80\xA2") {
    i = 3;
  } else {
    return std::nullopt;
  }
  if (i < line.size() && !is_ws(line[i])) return std::nullopt;
  return trim(line.substr(i));
}

}  // namespace

Action parse_action_call(std::string_view text) {
  std::optional<Action> last;
  std::optional<ParseError> known_failure;
  std::optional<ParseError> unknown_call;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_ident_start(text[i]) || (i > 0 && is_ident(text[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_ident(text[j])) ++j;
    const std::string_view name = text.substr(i, j - i);
    std::size_t k = j;
    while (k < text.size() && is_ws(text[k])) ++k;
    if (k >= text.size() || text[k] != '(') {
      i = j;
      continue;
    }
    const auto kind = action_kind_from_name(name);
    if (!kind) {
      if (looks_like_keyword_call(text, k + 1))
        unknown_call = ParseError(i, "unknown action '" + std::string(name) + "'");
      i = j;
      continue;
    }
    CallParser parser(text, i);
    try {
      last = parser.parse_call(*kind);
      i = parser.pos();
    } catch (const ParseError& e) {
      known_failure = e;
      i = j;
    }
  }
  if (last) return *last;
  if (known_failure) throw *known_failure;
  if (unknown_call) throw *unknown_call;
  throw ParseError(std::string_view::npos, "no action call found");
}

std::vector<std::string> parse_plan(std::string_view text) {
  std::vector<std::string> items;
  bool in_block = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (auto item = list_item(line)) {
      in_block = true;
      if (!item->empty()) items.emplace_back(*item);
    } else if (in_block && !trim(line).empty()) {
      break;
    }
    if (end == text.size()) break;
  }
  if (items.empty()) throw Error(ErrorKind::EmptyPlan, "no subgoal list found in manager output");
  return items;
}

}  // namespace mogplan
