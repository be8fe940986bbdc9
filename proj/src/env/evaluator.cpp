#include <algorithm>

#include "mogplan/core/error.hpp"
#include "mogplan/core/utf8.hpp"
#include "mogplan/env/task.hpp"
#include "mogplan/grounding/a1.hpp"

namespace mogplan::env {

namespace {

using nlohmann::json;

[[noreturn]] void bad_params(const std::string& check, const std::string& why) {
  throw Error(ErrorKind::InvalidTask, "evaluator " + check + ": " + why);
}

std::string str_param(const json& p, const char* key, const std::string& check) {
  if (!p.is_object() || !p.contains(key) || !p[key].is_string())
    bad_params(check, std::string("parameter '") + key + "' must be a string");
  return p[key].get<std::string>();
}

bool bool_param(const json& p, const char* key, const std::string& check, std::optional<bool> fallback = {}) {
  if (p.is_object() && p.contains(key)) {
    if (!p[key].is_boolean()) bad_params(check, std::string("parameter '") + key + "' must be a boolean");
    return p[key].get<bool>();
  }
  if (fallback) return *fallback;
  bad_params(check, std::string("missing parameter '") + key + "'");
}

const AppState& app_param(const DesktopState& s, const json& p, const std::string& check) {
  const std::string name = str_param(p, "app", check);
  const AppState* app = s.find_app(name);
  if (!app) bad_params(check, "unknown application \"" + name + "\"");
  return *app;
}

const TextDocument* document_of(const DesktopState& s, const json& p, const std::string& check) {
  const AppState& app = app_param(s, p, check);
  return app.document ? &app.document->document : nullptr;
}

std::string cell_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

bool cells_equal(const DesktopState& s, const json& p) {
  const AppState& app = app_param(s, p, "cells_equal");
  if (!app.sheet) return false;
  const std::string default_sheet = p.contains("sheet") ? str_param(p, "sheet", "cells_equal") : app.sheet->active_sheet;
  if (!p.contains("cells") || !p["cells"].is_object()) bad_params("cells_equal", "parameter 'cells' must be a map");
  for (const auto& [key, expected] : p["cells"].items()) {
    const auto addr = grounding::try_parse_a1(key);
    if (!addr) bad_params("cells_equal", "bad cell key \"" + key + "\"");
    const std::string sheet = addr->sheet.value_or(default_sheet);
    if (!app.sheet->workbook.has_sheet(sheet)) return false;
    if (app.sheet->workbook.get(sheet, addr->column, addr->row) != cell_text(expected)) return false;
  }
  return true;
}

bool flag_equals(const DesktopState& s, const json& p) {
  const AppState& app = app_param(s, p, "flag_equals");
  const std::string flag = str_param(p, "flag", "flag_equals");
  const bool expected = bool_param(p, "value", "flag_equals");
  auto it = app.flags.find(flag);
  return (it != app.flags.end() && it->second) == expected;
}

const ElementState* element_anywhere(const DesktopState& s, const std::string& id) {
  for (const auto& app : s.apps)
    if (auto* e = app.find_element(id)) return e;
  for (const auto& popup : s.popups)
    for (const auto& e : popup.elements)
      if (e.element.id == id) return &e;
  return nullptr;
}

bool field_equals(const DesktopState& s, const json& p) {
  const auto* e = element_anywhere(s, str_param(p, "element", "field_equals"));
  return e && e->element.value == str_param(p, "value", "field_equals");
}

bool item_in_container(const DesktopState& s, const json& p) {
  const auto* e = element_anywhere(s, str_param(p, "element", "item_in_container"));
  return e && e->container == str_param(p, "container", "item_in_container");
}

// Word-token indices of the document.
std::vector<std::size_t> words_of(const TextDocument& doc) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < doc.size(); ++i)
    if (doc.tokens()[i].kind == TokenKind::Word) out.push_back(i);
  return out;
}

bool styled_exactly(const TextDocument& doc, const std::vector<std::size_t>& target, const std::string& attr,
                    bool exclusive) {
  for (std::size_t t : target)
    if (!doc.tokens()[t].attrs.count(attr)) return false;
  if (!exclusive) return true;
  for (std::size_t t : words_of(doc))
    if (doc.tokens()[t].attrs.count(attr) && std::find(target.begin(), target.end(), t) == target.end())
      return false;
  return true;
}

bool text_has_style(const DesktopState& s, const json& p) {
  const TextDocument* doc = document_of(s, p, "text_has_style");
  const std::string text = str_param(p, "text", "text_has_style");
  const std::string attr = str_param(p, "attr", "text_has_style");
  const bool exclusive = bool_param(p, "exclusive", "text_has_style", false);
  if (!doc) return false;
  const auto needle = TextDocument::tokenize(utf8::decode(text));
  std::vector<std::u32string> wanted;
  for (const auto& t : needle)
    if (t.kind == TokenKind::Word) wanted.push_back(t.text);
  if (wanted.empty()) bad_params("text_has_style", "parameter 'text' has no words");
  const auto words = words_of(*doc);
  for (std::size_t i = 0; i + wanted.size() <= words.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < wanted.size() && match; ++k) match = doc->tokens()[words[i + k]].text == wanted[k];
    if (match)
      return styled_exactly(*doc, {words.begin() + i, words.begin() + i + wanted.size()}, attr, exclusive);
  }
  return false;
}

bool paragraph_style(const DesktopState& s, const json& p) {
  const TextDocument* doc = document_of(s, p, "paragraph_style");
  const std::string attr = str_param(p, "attr", "paragraph_style");
  const bool exclusive = bool_param(p, "exclusive", "paragraph_style", true);
  if (!p.contains("paragraph") || !p["paragraph"].is_number_integer())
    bad_params("paragraph_style", "parameter 'paragraph' must be an integer");
  if (!doc) return false;
  std::vector<std::vector<std::size_t>> paragraphs(1);
  for (std::size_t i = 0; i < doc->size(); ++i) {
    const auto kind = doc->tokens()[i].kind;
    if (kind == TokenKind::Newline) paragraphs.emplace_back();
    if (kind == TokenKind::Word) paragraphs.back().push_back(i);
  }
  std::erase_if(paragraphs, [](const auto& para) { return para.empty(); });
  long long index = p["paragraph"].get<long long>();
  const auto n = static_cast<long long>(paragraphs.size());
  if (index < 0) index += n;
  if (index < 0 || index >= n) return false;
  return styled_exactly(*doc, paragraphs[static_cast<std::size_t>(index)], attr, exclusive);
}

bool selection_equals(const DesktopState& s, const json& p) {
  const TextDocument* doc = document_of(s, p, "selection_equals");
  return doc && doc->selected_text() == str_param(p, "text", "selection_equals");
}

bool document_equals(const DesktopState& s, const json& p) {
  const TextDocument* doc = document_of(s, p, "document_equals");
  return doc && doc->text() == str_param(p, "text", "document_equals");
}

bool focused_app(const DesktopState& s, const json& p) {
  return &app_param(s, p, "focused_app") == &s.focused();
}

bool clipboard_equals(const DesktopState& s, const json& p) {
  return s.clipboard == str_param(p, "text", "clipboard_equals");
}

}  // namespace

const EvaluatorRegistry& EvaluatorRegistry::builtin() {
  static const EvaluatorRegistry registry = [] {
    EvaluatorRegistry r;
    r.add("cells_equal", cells_equal);
    r.add("flag_equals", flag_equals);
    r.add("field_equals", field_equals);
    r.add("text_has_style", text_has_style);
    r.add("paragraph_style", paragraph_style);
    r.add("selection_equals", selection_equals);
    r.add("document_equals", document_equals);
    r.add("item_in_container", item_in_container);
    r.add("focused_app", focused_app);
    r.add("clipboard_equals", clipboard_equals);
    return r;
  }();
  return registry;
}

void EvaluatorRegistry::add(const std::string& name, EvaluatorFn fn) { checks_[name] = std::move(fn); }

std::vector<std::string> EvaluatorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : checks_) out.push_back(name);
  out.push_back("all_of");
  std::sort(out.begin(), out.end());
  return out;
}

bool EvaluatorRegistry::check(const EvaluatorSpec& spec, const DesktopState& state) const {
  if (spec.name == "all_of") {
    const auto& p = spec.params;
    if (!p.is_object() || !p.contains("checks") || !p["checks"].is_array())
      bad_params("all_of", "parameter 'checks' must be a list");
    bool ok = true;
    // Every nested check runs so that unknown names surface even after a failure.
    for (const auto& c : p["checks"]) {
      if (!c.is_object() || !c.contains("name") || !c["name"].is_string())
        bad_params("all_of", "each check needs a name");
      EvaluatorSpec nested{c["name"].get<std::string>(), c.value("params", json::object())};
      ok = check(nested, state) && ok;
    }
    return ok;
  }
  auto it = checks_.find(spec.name);
  if (it == checks_.end()) throw Error(ErrorKind::UnknownEvaluator, "no evaluator named \"" + spec.name + "\"");
  return it->second(state, spec.params);
}

double evaluate(const TaskSpec& task, const DesktopState& final_state, const Action& final_action,
                const EvaluatorRegistry& registry) {
  if (!task.feasible) return final_action.kind() == ActionKind::Fail ? 1.0 : 0.0;
  return registry.check(task.evaluator, final_state) ? 1.0 : 0.0;
}

}  // namespace mogplan::env
