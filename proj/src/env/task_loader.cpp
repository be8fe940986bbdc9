#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mogplan/core/error.hpp"
#include "mogplan/env/task.hpp"
#include "mogplan/grounding/a1.hpp"

namespace mogplan::env {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& where, const std::string& why) {
  throw Error(ErrorKind::InvalidTask, where + ": " + why);
}

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  static const std::regex int_re(R"([-+]?[0-9]+)");
  static const std::regex float_re(R"([-+]?([0-9]*\.[0-9]+|[0-9]+\.[0-9]*)([eE][-+]?[0-9]+)?|[-+]?[0-9]+[eE][-+]?[0-9]+)");
  if (std::regex_match(s, int_re)) {
    try {
      return std::stoll(s);
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  if (std::regex_match(s, float_re)) return std::stod(s);
  return s;
}

json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = node_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

// Typed accessors that report the dotted path of the offending field.
struct Reader {
  const json& j;
  std::string path;

  Reader at(const std::string& key) const { return {j.at(key), path + "." + key}; }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }

  std::string str(const std::string& key) const {
    if (!has(key)) invalid(path, "missing field '" + key + "'");
    return as_string(j.at(key), path + "." + key);
  }
  std::string str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? as_string(j.at(key), path + "." + key) : fallback;
  }
  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j.at(key).is_boolean()) invalid(path + "." + key, "expected true or false");
    return j.at(key).get<bool>();
  }
  int integer(const std::string& key) const {
    if (!has(key)) invalid(path, "missing field '" + key + "'");
    return as_int(j.at(key), path + "." + key);
  }
  int integer_or(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

  static std::string as_string(const json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    invalid(where, "expected text");
  }
  static int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) invalid(where, "expected an integer");
    const auto n = v.get<long long>();
    if (n < -1'000'000'000 || n > 1'000'000'000) invalid(where, "integer out of range");
    return static_cast<int>(n);
  }
};

std::pair<int, int> int_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) invalid(where, "expected [a, b]");
  return {Reader::as_int(v[0], where), Reader::as_int(v[1], where)};
}

Rect rect(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) invalid(where, "expected [x, y, width, height]");
  return Rect{Reader::as_int(v[0], where), Reader::as_int(v[1], where), Reader::as_int(v[2], where),
              Reader::as_int(v[3], where)};
}

std::vector<Effect> effects(const Reader& r, const std::string& key) {
  std::vector<Effect> out;
  if (!r.has(key)) return out;
  const Reader list = r.at(key);
  if (list.j.is_string()) {
    out.push_back(parse_effect(list.j.get<std::string>()));
    return out;
  }
  if (!list.j.is_array()) invalid(list.path, "expected a list of effects");
  for (const auto& e : list.j) {
    if (!e.is_string()) invalid(list.path, "effects are written as text, e.g. \"toggle dim_screen\"");
    try {
      out.push_back(parse_effect(e.get<std::string>()));
    } catch (const Error& err) {
      invalid(list.path, err.message());
    }
  }
  return out;
}

ElementState element(const Reader& r, const std::string& app_id) {
  ElementState e;
  e.element.id = r.str("id");
  e.element.label = r.str_or("label", "");
  const std::string kind = r.str_or("kind", "button");
  auto k = element_kind_from_string(kind);
  if (!k) invalid(r.path + ".kind", "unknown element kind \"" + kind + "\"");
  e.element.kind = *k;
  if (!r.has("bbox")) invalid(r.path, "missing field 'bbox'");
  e.element.bbox = rect(r.j.at("bbox"), r.path + ".bbox");
  e.element.enabled = r.boolean_or("enabled", true);
  e.element.app_id = app_id;
  e.element.value = r.str_or("value", "");
  e.visible = r.boolean_or("visible", true);
  e.flag = r.str_or("flag", "");
  e.container = r.str_or("container", "");
  e.drop_zone = r.str_or("drop_zone", "");
  e.on_click = effects(r, "on_click");
  e.on_right_click = effects(r, "on_right_click");
  e.on_enter = effects(r, "on_enter");
  return e;
}

std::vector<ElementState> elements(const Reader& r, const std::string& key, const std::string& app_id) {
  std::vector<ElementState> out;
  if (!r.has(key)) return out;
  const Reader list = r.at(key);
  if (!list.j.is_array()) invalid(list.path, "expected a list");
  for (std::size_t i = 0; i < list.j.size(); ++i)
    out.push_back(element(Reader{list.j[i], list.path + "[" + std::to_string(i) + "]"}, app_id));
  return out;
}

Sheet sheet(const Reader& r, int col_width, int row_height) {
  Sheet s;
  s.default_column_width = col_width;
  s.default_row_height = row_height;
  if (r.has("cells")) {
    const Reader cells = r.at("cells");
    if (!cells.j.is_object()) invalid(cells.path, "expected a map from A1 keys to values");
    for (const auto& [key, value] : cells.j.items()) {
      const auto addr = grounding::try_parse_a1(key);
      if (!addr || addr->sheet) invalid(cells.path, "bad cell key \"" + key + "\"");
      const std::string text = value.is_null() ? "" : Reader::as_string(value, cells.path + "." + key);
      if (!text.empty()) s.cells[{addr->row, addr->column}] = text;
    }
  }
  if (r.has("column_widths")) {
    const Reader widths = r.at("column_widths");
    for (const auto& [key, value] : widths.j.items()) {
      int column = 0;
      try {
        column = grounding::column_index(key);
      } catch (const Error&) {
        invalid(widths.path, "bad column label \"" + key + "\"");
      }
      s.column_widths[column] = Reader::as_int(value, widths.path + "." + key);
    }
  }
  if (r.has("row_heights")) {
    const Reader heights = r.at("row_heights");
    for (const auto& [key, value] : heights.j.items()) {
      int row = 0;
      try {
        row = std::stoi(key);
      } catch (const std::exception&) {
        invalid(heights.path, "bad row number \"" + key + "\"");
      }
      if (row < 1) invalid(heights.path, "row numbers start at 1");
      s.row_heights[row - 1] = Reader::as_int(value, heights.path + "." + key);
    }
  }
  for (const auto& [_, w] : s.column_widths)
    if (w < 1) invalid(r.path, "column widths must be positive");
  for (const auto& [_, h] : s.row_heights)
    if (h < 1) invalid(r.path, "row heights must be positive");
  return s;
}

AppState app(const Reader& r) {
  AppState a;
  a.id = r.str("id");
  a.name = r.str_or("name", a.id);
  a.elements = elements(r, "elements", a.id);
  if (r.has("flags")) {
    const Reader flags = r.at("flags");
    if (!flags.j.is_object()) invalid(flags.path, "expected a map of booleans");
    for (const auto& [k, v] : flags.j.items()) {
      if (!v.is_boolean()) invalid(flags.path + "." + k, "expected true or false");
      a.flags[k] = v.get<bool>();
    }
  }
  if (r.has("keybindings")) {
    const Reader keys = r.at("keybindings");
    if (!keys.j.is_object()) invalid(keys.path, "expected a map from key combos to effects");
    for (const auto& [combo, _] : keys.j.items()) {
      std::vector<std::string> parts;
      std::stringstream ss(combo);
      for (std::string part; std::getline(ss, part, '+');) parts.push_back(part);
      a.keybindings[normalize_key_combo(parts)] = effects(keys, combo);
    }
  }
  if (r.has("document")) {
    const Reader d = r.at("document");
    DocumentView view;
    view.element_id = d.str_or("element_id", a.id + ":document");
    view.label = d.str_or("label", "Document");
    if (!d.has("bbox")) invalid(d.path, "missing field 'bbox'");
    view.layout.area = rect(d.j.at("bbox"), d.path + ".bbox");
    if (d.has("char_size")) {
      auto [w, h] = int_pair(d.j.at("char_size"), d.path + ".char_size");
      view.layout.char_width = w;
      view.layout.char_height = h;
    }
    view.layout.scroll_rows = d.integer_or("scroll_rows", 0);
    view.document.set_text(d.str_or("text", ""));
    a.document = std::move(view);
  }
  if (r.has("spreadsheet")) {
    const Reader s = r.at("spreadsheet");
    SheetView view;
    if (!s.has("bbox")) invalid(s.path, "missing field 'bbox'");
    view.layout.area = rect(s.j.at("bbox"), s.path + ".bbox");
    const int col_width = s.integer_or("col_width", 100);
    const int row_height = s.integer_or("row_height", 24);
    if (col_width < 1 || row_height < 1) invalid(s.path, "cell sizes must be positive");
    if (!s.has("sheets") || !s.j.at("sheets").is_object() || s.j.at("sheets").empty())
      invalid(s.path, "'sheets' must map at least one sheet name to its contents");
    const Reader sheets = s.at("sheets");
    for (const auto& [name, body] : sheets.j.items()) {
      if (name.empty() || name.find('!') != std::string::npos) invalid(sheets.path, "bad sheet name \"" + name + "\"");
      view.workbook.add_sheet(name, sheet(Reader{body, sheets.path + "." + name}, col_width, row_height));
    }
    view.active_sheet = s.str_or("active", view.workbook.sheet_names().front());
    if (!view.workbook.has_sheet(view.active_sheet))
      invalid(s.path + ".active", "no sheet named \"" + view.active_sheet + "\"");
    a.sheet = std::move(view);
  }
  return a;
}

Popup popup(const Reader& r, const std::string& name) {
  Popup p;
  p.name = name;
  p.elements = elements(r, "elements", std::string(kPopupAppId));
  return p;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidTask, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json yaml_to_json(const std::string& yaml_text) {
  try {
    return node_to_json(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::InvalidTask, std::string("YAML syntax error: ") + e.what());
  }
}

TaskSpec task_from_json(const json& doc) {
  if (!doc.is_object()) invalid("task", "expected a mapping at the top level");
  const Reader r{doc, "task"};
  TaskSpec t;
  t.id = r.str("id");
  const Reader root{doc, "task " + t.id};
  t.category = root.str_or("category", "general");
  t.instruction = root.str("instruction");
  t.feasible = root.boolean_or("feasible", true);

  DesktopState& s = t.initial_state;
  if (root.has("screen")) {
    auto [w, h] = int_pair(doc.at("screen"), root.path + ".screen");
    s.screen = Size{w, h};
  }
  if (!root.has("apps") || !doc.at("apps").is_array()) invalid(root.path, "'apps' must be a list");
  const Reader apps = root.at("apps");
  for (std::size_t i = 0; i < apps.j.size(); ++i)
    s.apps.push_back(app(Reader{apps.j[i], apps.path + "[" + std::to_string(i) + "]"}));
  s.focused_app = root.str_or("focused_app", s.apps.empty() ? "" : s.apps.front().id);
  if (root.has("popups")) {
    const Reader list = root.at("popups");
    if (!list.j.is_array()) invalid(list.path, "expected a list");
    for (std::size_t i = 0; i < list.j.size(); ++i) {
      const Reader item{list.j[i], list.path + "[" + std::to_string(i) + "]"};
      s.popups.push_back(popup(item, item.str("name")));
    }
  }
  if (root.has("popup_library")) {
    const Reader lib = root.at("popup_library");
    if (!lib.j.is_object()) invalid(lib.path, "expected a map from popup names to popups");
    for (const auto& [name, body] : lib.j.items())
      s.popup_library[name] = popup(Reader{body, lib.path + "." + name}, name);
  }
  if (root.has("events")) {
    const Reader list = root.at("events");
    if (!list.j.is_array()) invalid(list.path, "expected a list");
    for (std::size_t i = 0; i < list.j.size(); ++i) {
      const Reader ev{list.j[i], list.path + "[" + std::to_string(i) + "]"};
      ScheduledEvent e;
      e.at_step = ev.integer("at_step");
      e.app_id = ev.str("app");
      e.effects = effects(ev, "effects");
      s.schedule.push_back(std::move(e));
    }
  }
  if (t.feasible || root.has("evaluator")) {
    if (!root.has("evaluator")) invalid(root.path, "missing field 'evaluator'");
    const Reader ev = root.at("evaluator");
    t.evaluator.name = ev.str("name");
    if (ev.has("params")) t.evaluator.params = ev.j.at("params");
    if (!t.evaluator.params.is_object()) invalid(ev.path + ".params", "expected a map");
  }
  if (root.has("script")) {
    t.script = doc.at("script");
    if (!t.script.is_array()) invalid(root.path + ".script", "expected a list of rules");
  }
  try {
    s.validate();
  } catch (const Error& e) {
    invalid(root.path, e.message());
  }
  return t;
}

TaskSpec load_task_file(const std::filesystem::path& path) {
  try {
    return task_from_json(yaml_to_json(read_file(path)));
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidTask, path.string() + ": " + e.message());
  }
}

Suite load_suite(const std::filesystem::path& path) {
  json doc;
  try {
    doc = yaml_to_json(read_file(path));
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidTask, path.string() + ": " + e.message());
  }
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
    throw Error(ErrorKind::InvalidTask, path.string() + ": a suite needs a 'tasks' list");
  Suite suite;
  suite.name = doc.value("name", path.stem().string());
  suite.description = doc.value("description", "");
  const auto base = path.parent_path();
  for (const auto& entry : doc["tasks"]) {
    if (entry.is_string()) {
      suite.tasks.push_back(load_task_file(base / entry.get<std::string>()));
    } else {
      try {
        suite.tasks.push_back(task_from_json(entry));
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidTask, path.string() + ": " + e.message());
      }
    }
  }
  for (std::size_t i = 0; i < suite.tasks.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (suite.tasks[i].id == suite.tasks[k].id)
        throw Error(ErrorKind::InvalidTask, path.string() + ": duplicate task id \"" + suite.tasks[i].id + "\"");
  return suite;
}

}  // namespace mogplan::env
