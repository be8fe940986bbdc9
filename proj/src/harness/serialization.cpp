#include <fstream>

#include "mogplan/backend/parsers.hpp"
#include "mogplan/core/error.hpp"
#include "mogplan/harness/harness.hpp"

namespace mogplan::harness {

using nlohmann::json;
using planning::StepError;
using planning::StepRecord;

namespace {

[[noreturn]] void bad_log(const std::string& why) { throw Error(ErrorKind::InvalidConfig, "log record: " + why); }

json point_json(PointCoordinate p) { return json::array({p.x, p.y}); }

PointCoordinate point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) bad_log("point must be [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

json error_json(const std::optional<StepError>& e) {
  if (!e) return nullptr;
  return {{"kind", std::string(to_string(e->kind))}, {"message", e->message}};
}

std::optional<ErrorKind> error_kind_from(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::InvalidConfig); ++k)
    if (to_string(static_cast<ErrorKind>(k)) == name) return static_cast<ErrorKind>(k);
  return std::nullopt;
}

std::optional<StepError> error_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto kind = error_kind_from(j.at("kind").get<std::string>());
  if (!kind) bad_log("unknown error kind");
  return StepError{*kind, j.at("message").get<std::string>()};
}

}  // namespace

json to_json(const Action& action) { return action.to_call(); }

Action action_from_json(const json& j) {
  if (!j.is_string()) bad_log("action must be a call string");
  return parse_action_call(j.get<std::string>());
}

json to_json(const StepRecord& s) {
  json grounding = json::object();
  json points = json::array();
  for (const auto& p : s.points) points.push_back(point_json(p));
  grounding["points"] = points;
  grounding["span"] = s.span ? json{{"start", point_json(s.span->start)}, {"end", point_json(s.span->end)}} : json(nullptr);
  json cells = json::array();
  for (const auto& w : s.cell_writes) cells.push_back({{"cell", grounding::format_a1(w.address)}, {"value", w.value}});
  grounding["cells"] = cells;
  json pw = json::array();
  for (const auto& [p, v] : s.point_writes) pw.push_back({{"point", point_json(p)}, {"value", v}});
  grounding["point_writes"] = pw;

  json j = {{"step", s.step},
            {"subgoal_index", s.subgoal_index},
            {"subgoal", s.subgoal},
            {"action", s.action ? to_json(*s.action) : json(nullptr)},
            {"route", std::string(to_string(s.route))},
            {"grounding", grounding},
            {"targets", s.targets},
            {"error", error_json(s.error)},
            {"observation", s.observation}};
  if (!s.action) j["raw_output"] = s.raw_output;
  return j;
}

StepRecord step_from_json(const json& j) {
  StepRecord s;
  try {
    s.step = j.at("step").get<int>();
    s.subgoal_index = j.at("subgoal_index").get<int>();
    s.subgoal = j.at("subgoal").get<std::string>();
    if (!j.at("action").is_null()) s.action = action_from_json(j.at("action"));
    s.raw_output = j.value("raw_output", "");
    auto route = expert_from_string(j.at("route").get<std::string>());
    if (!route) bad_log("unknown route");
    s.route = *route;
    const auto& g = j.at("grounding");
    for (const auto& p : g.at("points")) s.points.push_back(point_from(p));
    if (!g.at("span").is_null())
      s.span = SpanCoordinates{point_from(g.at("span").at("start")), point_from(g.at("span").at("end"))};
    for (const auto& c : g.at("cells"))
      s.cell_writes.push_back(CellWrite{grounding::parse_a1(c.at("cell").get<std::string>()), c.at("value").get<std::string>()});
    for (const auto& w : g.at("point_writes"))
      s.point_writes.emplace_back(point_from(w.at("point")), w.at("value").get<std::string>());
    s.targets = j.at("targets").get<std::vector<std::string>>();
    s.error = error_from(j.at("error"));
    s.observation = j.value("observation", "");
  } catch (const json::exception& e) {
    bad_log(e.what());
  }
  return s;
}

json to_json(const EpisodeRecord& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(to_json(s));
  json subgoals = json::array();
  for (const auto& g : r.subgoals)
    subgoals.push_back({{"text", g.text}, {"status", std::string(to_string(g.status))}, {"steps_used", g.steps_used}});
  return {{"schema", kEpisodeSchema},
          {"task_id", r.task_id},
          {"category", r.category},
          {"mode", std::string(to_string(r.mode))},
          {"budget", r.budget},
          {"mog", r.mog_enabled},
          {"steps_used", r.steps_used()},
          {"manager_invocations", r.manager_invocations},
          {"plan_revision", r.plan_revision},
          {"termination", std::string(to_string(r.termination))},
          {"planning_error", error_json(r.planning_error)},
          {"reward", r.reward >= 1.0 ? 1 : 0},
          {"failure_tag", r.failure_tag ? json(std::string(to_string(*r.failure_tag))) : json(nullptr)},
          {"final_action", r.final_action ? to_json(*r.final_action) : json(nullptr)},
          {"memory", r.memory},
          {"subgoals", subgoals},
          {"steps", steps}};
}

EpisodeRecord episode_from_json(const json& j) {
  EpisodeRecord r;
  try {
    if (j.at("schema").get<std::string>() != kEpisodeSchema) bad_log("unsupported schema");
    r.task_id = j.at("task_id").get<std::string>();
    r.category = j.at("category").get<std::string>();
    auto mode = planning::planning_mode_from_string(j.at("mode").get<std::string>());
    if (!mode) bad_log("unknown mode");
    r.mode = *mode;
    r.budget = j.at("budget").get<int>();
    r.mog_enabled = j.at("mog").get<bool>();
    r.manager_invocations = j.at("manager_invocations").get<int>();
    r.plan_revision = j.at("plan_revision").get<int>();
    auto term = planning::termination_from_string(j.at("termination").get<std::string>());
    if (!term) bad_log("unknown termination");
    r.termination = *term;
    r.planning_error = error_from(j.at("planning_error"));
    r.reward = j.at("reward").get<double>();
    if (!j.at("failure_tag").is_null()) {
      r.failure_tag = planning::failure_tag_from_string(j.at("failure_tag").get<std::string>());
      if (!r.failure_tag) bad_log("unknown failure tag");
    }
    if (!j.at("final_action").is_null()) r.final_action = action_from_json(j.at("final_action"));
    r.memory = j.at("memory").get<std::vector<std::string>>();
    for (const auto& g : j.at("subgoals")) {
      planning::SubgoalRecord rec;
      rec.text = g.at("text").get<std::string>();
      const std::string status = g.at("status").get<std::string>();
      if (status == "pending") rec.status = planning::SubgoalStatus::Pending;
      else if (status == "active") rec.status = planning::SubgoalStatus::Active;
      else if (status == "success") rec.status = planning::SubgoalStatus::Success;
      else if (status == "failure") rec.status = planning::SubgoalStatus::Failure;
      else bad_log("unknown subgoal status");
      rec.steps_used = g.at("steps_used").get<int>();
      r.subgoals.push_back(std::move(rec));
    }
    for (const auto& s : j.at("steps")) r.steps.push_back(step_from_json(s));
  } catch (const json::exception& e) {
    bad_log(e.what());
  }
  return r;
}

std::vector<EpisodeRecord> read_episodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open " + path.string());
  std::vector<EpisodeRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(episode_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidConfig, path.string() + ":" + std::to_string(lineno) + ": " + e.message());
    }
  }
  return out;
}

}  // namespace mogplan::harness
