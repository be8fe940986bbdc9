#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <type_traits>
#include <variant>

#include "mogplan/backend/parsers.hpp"
#include "mogplan/core/error.hpp"
#include "mogplan/grounding/a1.hpp"
#include "mogplan/grounding/grounding.hpp"
#include "mogplan/harness/harness.hpp"

namespace py = pybind11;
using namespace mogplan;
using nlohmann::json;

namespace {

using Completion = std::function<std::string(const std::string& role, const std::string& prompt,
                                             const std::string& context_id)>;

class CallbackBackend : public ModelBackend {
 public:
  explicit CallbackBackend(Completion fn) : fn_(std::move(fn)) {}
  std::string complete(const ModelRequest& request) override {
    return fn_(std::string(to_string(request.role)), request.prompt, request.context_id);
  }
  std::string describe() const override { return "python"; }

 private:
  Completion fn_;
};

json action_to_dict(const Action& action) {
  json args = json::object();
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, actions::Click>) {
          args = {{"element_description", a.element_description}, {"num_clicks", a.num_clicks},
                  {"button_type", a.button_type}, {"hold_keys", a.hold_keys}};
        } else if constexpr (std::is_same_v<T, actions::Type>) {
          args = {{"element_description", a.element_description}, {"text", a.text}, {"overwrite", a.overwrite},
                  {"enter", a.enter}};
        } else if constexpr (std::is_same_v<T, actions::Scroll>) {
          args = {{"element_description", a.element_description}, {"clicks", a.clicks}, {"shift", a.shift}};
        } else if constexpr (std::is_same_v<T, actions::Hotkey>) {
          args = {{"keys", a.keys}};
        } else if constexpr (std::is_same_v<T, actions::HoldAndPress>) {
          args = {{"hold_keys", a.hold_keys}, {"press_keys", a.press_keys}};
        } else if constexpr (std::is_same_v<T, actions::DragAndDrop>) {
          args = {{"element_description_1", a.element_description_1},
                  {"element_description_2", a.element_description_2}, {"hold_keys", a.hold_keys}};
        } else if constexpr (std::is_same_v<T, actions::SaveToKnowledge>) {
          args = {{"text", a.text}};
        } else if constexpr (std::is_same_v<T, actions::SwitchApplications>) {
          args = {{"app_name", a.app_name}};
        } else if constexpr (std::is_same_v<T, actions::HighlightTextSpan>) {
          args = {{"starting_phrase", a.starting_phrase}, {"ending_phrase", a.ending_phrase}};
        } else if constexpr (std::is_same_v<T, actions::SetCellValues>) {
          json cells = json::array();
          for (const auto& [k, v] : a.cell_values) cells.push_back({k, v});
          args = {{"cell_values", cells}, {"app_name", a.app_name}, {"sheet_name", a.sheet_name}};
        } else if constexpr (std::is_same_v<T, actions::Wait>) {
          args = {{"time", a.time}};
        }
      },
      action.value);
  return {{"name", std::string(action_name(action.kind()))}, {"args", args}, {"call", action.to_call()}};
}

harness::RunConfig config_from_json(const json& j) {
  harness::RunConfig c;
  c.suite_path = j.at("suite").get<std::string>();
  if (j.contains("mode")) {
    const auto mode = planning::planning_mode_from_string(j["mode"].get<std::string>());
    if (!mode) throw Error(ErrorKind::InvalidConfig, "unknown mode " + j["mode"].dump());
    c.mode = *mode;
  }
  c.budgets = j.value("budgets", c.budgets);
  c.mog_enabled = j.value("mog", c.mog_enabled);
  c.manager_backend = j.value("manager_backend", c.manager_backend);
  c.worker_backend = j.value("worker_backend", c.worker_backend);
  c.grounder = j.value("grounder", c.grounder);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.seed = j.value("seed", c.seed);
  c.shuffle = j.value("shuffle", c.shuffle);
  c.distractors = j.value("distractors", c.distractors);
  c.digest_chars = j.value("digest_chars", c.digest_chars);
  if (j.contains("tag_overrides") && !j["tag_overrides"].is_null())
    c.tag_overrides = j["tag_overrides"].get<std::string>();
  if (j.contains("out_dir") && !j["out_dir"].is_null()) c.out_dir = j["out_dir"].get<std::string>();
  return c;
}

std::string run_suite_json(const std::string& config_json) {
  const auto config = config_from_json(json::parse(config_json));
  harness::SuiteResult result;
  {
    py::gil_scoped_release release;
    result = harness::run_suite(config);
  }
  json episodes = json::array();
  for (const auto& r : result.episodes) episodes.push_back(harness::to_json(r));
  return json{{"report", harness::to_json(result.report)},
              {"report_text", harness::render_text(result.report)},
              {"episodes", episodes}}
      .dump();
}

std::string run_task_json(const std::string& task_path, const Completion& completion, const std::string& mode,
                          int budget, bool mog) {
  const auto task = env::load_task_file(task_path);
  CallbackBackend backend(completion);
  const grounding::TokenOverlapGrounder grounder;
  planning::EpisodeOptions options;
  const auto parsed = planning::planning_mode_from_string(mode);
  if (!parsed) throw Error(ErrorKind::InvalidConfig, "unknown mode \"" + mode + "\"");
  options.mode = *parsed;
  options.budget = budget;
  options.mog_enabled = mog;
  options.context_id = task.id + "@" + std::to_string(budget);
  options.visual = &grounder;
  auto record = planning::run_episode(task, task.initial_state, options, backend);
  record.failure_tag = harness::assign_failure_tag(record, task.feasible);
  return harness::to_json(record).dump();
}

}  // namespace

PYBIND11_MODULE(_mogplan, m) {
  m.doc() = "Native core of the mogplan agent planner";

  static py::object* error_type = new py::object(py::exception<Error>(m, "Error", PyExc_RuntimeError));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = (*error_type)(e.message());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type->ptr(), exc.ptr());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("version", [] { return std::string(MOGPLAN_VERSION); });

  m.def("parse_action", [](const std::string& text) { return action_to_dict(parse_action_call(text)).dump(); },
        py::arg("text"), "Parses the last action call in a model reply; returns {name, args, call} as JSON.");
  m.def("canonical_call", [](const std::string& text) { return parse_action_call(text).to_call(); },
        py::arg("text"), "Canonical keyword form of the last action call in the text.");
  m.def("parse_plan", [](const std::string& text) { return parse_plan(text); }, py::arg("text"));

  m.def("routing_table", [] { return grounding::routing_table_json().dump(); });
  m.def("route", [](const std::string& call) {
    return std::string(to_string(grounding::route(parse_action_call(call)).expert));
  }, py::arg("call"), "Expert that grounds the given action call.");

  m.def("parse_a1", [](const std::string& text) {
    const auto a = grounding::parse_a1(text);
    return py::make_tuple(a.sheet ? py::object(py::str(*a.sheet)) : py::none(), a.column, a.row);
  }, py::arg("text"), "Returns (sheet or None, column, row), both 0-based.");
  m.def("format_a1", [](std::optional<std::string> sheet, int column, int row) {
    return grounding::format_a1({std::move(sheet), column, row});
  }, py::arg("sheet"), py::arg("column"), py::arg("row"));

  m.def("load_suite", [](const std::string& path) {
    const auto suite = env::load_suite(path);
    json tasks = json::array();
    for (const auto& t : suite.tasks)
      tasks.push_back({{"id", t.id}, {"category", t.category}, {"instruction", t.instruction},
                       {"feasible", t.feasible}, {"evaluator", t.evaluator.name}});
    return json{{"name", suite.name}, {"description", suite.description}, {"tasks", tasks}}.dump();
  }, py::arg("path"));
  m.def("validate_suite", [](const std::string& path) { return harness::validate_suite(env::load_suite(path)); },
        py::arg("path"));

  m.def("run_suite", &run_suite_json, py::arg("config_json"),
        "Runs a suite; returns {report, report_text, episodes} as JSON.");
  m.def("run_task", &run_task_json, py::arg("task_path"), py::arg("complete"), py::arg("mode") = "proactive",
        py::arg("budget") = 15, py::arg("mog") = true,
        "Runs one task file with a Python completion callback (role, prompt, context_id) -> reply.");
  m.def("report_from_logs", [](const std::string& dir) {
    const auto report = harness::report_from_logs(dir);
    return json{{"report", harness::to_json(report)}, {"report_text", harness::render_text(report)}}.dump();
  }, py::arg("log_dir"));
}
