#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mogplan/backend/action.hpp"
#include "mogplan/env/desktop.hpp"

namespace mogplan::env {

struct EvaluatorSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct TaskSpec {
  std::string id;
  std::string category;
  std::string instruction;
  bool feasible = true;
  DesktopState initial_state;
  EvaluatorSpec evaluator;
  // Scripted-backend rules shipped with the task (array, possibly empty).
  nlohmann::json script = nlohmann::json::array();
};

using EvaluatorFn = std::function<bool(const DesktopState&, const nlohmann::json& params)>;

/// Named success checks. `builtin()` holds cells_equal, flag_equals, field_equals,
/// text_has_style, paragraph_style, selection_equals, document_equals, item_in_container,
/// focused_app, clipboard_equals and all_of.
class EvaluatorRegistry {
 public:
  static const EvaluatorRegistry& builtin();

  void add(const std::string& name, EvaluatorFn fn);
  bool has(const std::string& name) const { return checks_.count(name) != 0; }
  std::vector<std::string> names() const;

  // Throws UnknownEvaluator, or InvalidTask when params are malformed.
  bool check(const EvaluatorSpec& spec, const DesktopState& state) const;

 private:
  std::map<std::string, EvaluatorFn> checks_;
};

/// Binary reward. Infeasible tasks score 1 iff the final action is `fail`; otherwise the
/// evaluator decides.
double evaluate(const TaskSpec& task, const DesktopState& final_state, const Action& final_action,
                const EvaluatorRegistry& registry = EvaluatorRegistry::builtin());

struct Suite {
  std::string name;
  std::string description;
  std::vector<TaskSpec> tasks;
};

/// Task files are YAML (JSON is accepted as a subset). Throws Error(InvalidTask) with the file
/// name and a description of the first problem; the resulting initial state is validated.
TaskSpec load_task_file(const std::filesystem::path& path);
TaskSpec task_from_json(const nlohmann::json& doc);
Suite load_suite(const std::filesystem::path& path);

/// Parses YAML text into JSON. Quoted scalars stay strings; plain scalars become booleans,
/// integers or floats when they read as such, null for `~`/`null`/empty.
nlohmann::json yaml_to_json(const std::string& yaml_text);

}  // namespace mogplan::env
