#include <algorithm>
#include <fstream>
#include <set>

#include "mogplan/core/error.hpp"
#include "mogplan/harness/harness.hpp"

namespace mogplan::harness {

namespace {

bool is_interaction_error(ErrorKind kind) {
  return kind == ErrorKind::ParseError || kind == ErrorKind::OutOfBounds || kind == ErrorKind::UnknownApp;
}

// Language-level targets an action names (descriptions or phrases).
std::vector<std::string> described_targets(const Action& action) {
  if (auto* a = action.get_if<actions::HighlightTextSpan>()) return {a->starting_phrase, a->ending_phrase};
  return action.element_descriptions();
}

}  // namespace

std::optional<FailureTag> assign_failure_tag(const EpisodeRecord& r, bool feasible) {
  if (r.reward >= 1.0) return std::nullopt;
  if (!feasible && (!r.final_action || r.final_action->kind() != ActionKind::Fail)) return FailureTag::Infeasible;
  if (r.termination == planning::Termination::Aborted) return FailureTag::Planning;
  if (!r.steps.empty()) {
    const int last_subgoal = r.steps.back().subgoal_index;
    bool grounding = false;
    bool interaction = false;
    for (const auto& s : r.steps) {
      if (s.subgoal_index != last_subgoal || !s.error) continue;
      grounding = grounding || is_grounding_error(s.error->kind);
      interaction = interaction || is_interaction_error(s.error->kind);
    }
    if (grounding) return FailureTag::Grounding;
    if (interaction) return FailureTag::Interaction;
  }
  if (r.termination == planning::Termination::BudgetExhausted) return FailureTag::Navigation;
  return FailureTag::Planning;
}

TagOverrides load_tag_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open tag overrides " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, path.string() + ": expected an object");
  TagOverrides out;
  for (const auto& [key, value] : doc.items()) {
    auto tag = value.is_string() ? planning::failure_tag_from_string(value.get<std::string>()) : std::nullopt;
    if (!tag) throw Error(ErrorKind::InvalidConfig, path.string() + ": bad failure tag for \"" + key + "\"");
    out[key] = *tag;
  }
  return out;
}

std::string_view to_string(BehaviorTag tag) {
  switch (tag) {
    case BehaviorTag::AdaptiveNavigation: return "AdaptiveNavigation";
    case BehaviorTag::AdaptiveInteraction: return "AdaptiveInteraction";
    case BehaviorTag::BackwardCorrection: return "BackwardCorrection";
    case BehaviorTag::TaskComplexity: return "TaskComplexity";
  }
  return "?";
}

std::vector<BehaviorTag> behavior_tags(const EpisodeRecord& r) {
  std::vector<BehaviorTag> tags;

  std::map<std::string, std::set<std::string>> subgoals_by_description;
  std::map<std::string, std::set<ActionKind>> kinds_by_target;
  std::map<std::string, int> last_touch;
  bool backward = false;
  for (const auto& s : r.steps) {
    if (!s.action) continue;
    if (!s.error)
      for (const auto& d : described_targets(*s.action)) subgoals_by_description[d].insert(s.subgoal);
    for (const auto& t : s.targets) {
      kinds_by_target[t].insert(s.action->kind());
      auto it = last_touch.find(t);
      if (it != last_touch.end() && s.subgoal_index - it->second >= 2) backward = true;
      last_touch[t] = s.subgoal_index;
    }
  }
  if (std::any_of(subgoals_by_description.begin(), subgoals_by_description.end(),
                  [](const auto& kv) { return kv.second.size() >= 2; }))
    tags.push_back(BehaviorTag::AdaptiveNavigation);
  if (std::any_of(kinds_by_target.begin(), kinds_by_target.end(), [](const auto& kv) { return kv.second.size() >= 2; }))
    tags.push_back(BehaviorTag::AdaptiveInteraction);
  if (backward) tags.push_back(BehaviorTag::BackwardCorrection);
  if (r.reward >= 1.0 && r.steps_used() > 15) tags.push_back(BehaviorTag::TaskComplexity);
  return tags;
}

BehaviorDiff diff_runs(const EpisodeRecord& a, const EpisodeRecord& b) {
  if (a.task_id != b.task_id)
    throw Error(ErrorKind::MismatchedTask, "records are for \"" + a.task_id + "\" and \"" + b.task_id + "\"");
  BehaviorDiff d;
  d.a = behavior_tags(a);
  d.b = behavior_tags(b);
  for (auto t : d.b)
    if (std::find(d.a.begin(), d.a.end(), t) == d.a.end()) d.gained.push_back(t);
  for (auto t : d.a)
    if (std::find(d.b.begin(), d.b.end(), t) == d.b.end()) d.lost.push_back(t);
  return d;
}

}  // namespace mogplan::harness
