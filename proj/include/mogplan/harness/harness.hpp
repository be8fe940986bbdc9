#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mogplan/backend/backend.hpp"
#include "mogplan/env/task.hpp"
#include "mogplan/grounding/grounding.hpp"
#include "mogplan/planning/planning.hpp"

namespace mogplan::harness {

using planning::EpisodeRecord;
using planning::FailureTag;
using planning::PlanningMode;

inline constexpr const char* kStepSchema = "mogplan.step/1";
inline constexpr const char* kEpisodeSchema = "mogplan.episode/1";
inline constexpr const char* kReportSchema = "mogplan.report/1";

// ---- serialization ----------------------------------------------------------------------

nlohmann::json to_json(const Action& action);
Action action_from_json(const nlohmann::json& j);
nlohmann::json to_json(const planning::StepRecord& step);
planning::StepRecord step_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EpisodeRecord& record);
EpisodeRecord episode_from_json(const nlohmann::json& j);

// Reads every record of an episodes.jsonl file. Throws Error(InvalidConfig) on bad lines.
std::vector<EpisodeRecord> read_episodes(const std::filesystem::path& path);

// ---- failure taxonomy -------------------------------------------------------------------

/// Rule table, applied in order to unsuccessful episodes (reward 0):
///   1. infeasible task whose final action is not `fail`          -> Infeasible
///   2. episode aborted (no usable plan, backend or evaluator error) -> Planning
///   3. a grounding error during the final subgoal                 -> Grounding
///   4. a parse or apply error during the final subgoal            -> Interaction
///   5. step budget exhausted                                      -> Navigation
///   6. otherwise (the agent signalled completion on a wrong state)  -> Planning
std::optional<FailureTag> assign_failure_tag(const EpisodeRecord& record, bool feasible);

/// Manual overrides keyed by "task_id" or "task_id@budget" (the latter wins).
using TagOverrides = std::map<std::string, FailureTag>;
TagOverrides load_tag_overrides(const std::filesystem::path& path);

// ---- behaviour tags ---------------------------------------------------------------------

enum class BehaviorTag { AdaptiveNavigation, AdaptiveInteraction, BackwardCorrection, TaskComplexity };

std::string_view to_string(BehaviorTag tag);

/// Heuristic trajectory labels:
///   AdaptiveNavigation  - one target description grounded under two or more subgoals
///   AdaptiveInteraction - two or more action kinds used against the same target
///   BackwardCorrection  - a target touched again two or more subgoals after its last touch
///   TaskComplexity      - success with more than 15 steps
std::vector<BehaviorTag> behavior_tags(const EpisodeRecord& record);

struct BehaviorDiff {
  std::vector<BehaviorTag> a;
  std::vector<BehaviorTag> b;
  // Tags exhibited by B but not by A.
  std::vector<BehaviorTag> gained;
  std::vector<BehaviorTag> lost;
};

/// Throws Error(MismatchedTask) when the records are for different tasks.
BehaviorDiff diff_runs(const EpisodeRecord& a, const EpisodeRecord& b);

// ---- suite runs -------------------------------------------------------------------------

struct RunConfig {
  std::filesystem::path suite_path;
  PlanningMode mode = PlanningMode::Proactive;
  std::vector<int> budgets = {15};
  bool mog_enabled = true;
  // "scripted", "scripted:<rules file>" or "remote:<config.json>".
  std::string manager_backend = "scripted";
  std::string worker_backend = "scripted";
  // "mock", "mock:<threshold>", "scripted:<rules file>" or "remote:<config.json>".
  std::string grounder = "mock";
  int parallelism = 1;
  std::uint64_t seed = 0;
  bool shuffle = false;
  bool distractors = false;
  std::size_t digest_chars = 4000;
  std::optional<std::filesystem::path> tag_overrides;
  // Log directory; nothing is written when empty.
  std::filesystem::path out_dir;

  /// Throws Error(InvalidConfig) on out-of-range values.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Counts only; rates are derived when rendering.
struct Tally {
  int episodes = 0;
  int successes = 0;
  long long steps = 0;

  bool operator==(const Tally&) const = default;
};

struct BudgetColumn {
  int budget = 0;
  Tally overall;
  std::map<std::string, Tally> by_category;
  std::map<std::string, long long> routes;        // expert name -> steps
  std::map<std::string, int> terminations;        // termination -> episodes
  std::map<std::string, int> failure_tags;        // tag -> episodes
  long long manager_invocations = 0;

  bool operator==(const BudgetColumn&) const = default;
};

struct SuiteReport {
  std::string suite;
  std::string mode;
  bool mog_enabled = true;
  std::vector<BudgetColumn> columns;
  // Tasks whose episode could not run at all (e.g. bad configuration), with the message.
  std::vector<std::string> errors;

  bool operator==(const SuiteReport&) const = default;
};

SuiteReport build_report(const std::vector<EpisodeRecord>& records, const std::string& suite = {});
nlohmann::json to_json(const SuiteReport& report);
std::string render_text(const SuiteReport& report);
// "75.0" style percentage computed with integer arithmetic (round half up).
std::string percent(int successes, int episodes);

struct SuiteResult {
  std::vector<EpisodeRecord> episodes;  // in commit order: budget-major, then task order
  SuiteReport report;
};

/// Builds the backend described by `spec`. Scripted backends include the rules shipped with
/// each task, scoped to that task. Throws Error(InvalidConfig).
std::shared_ptr<ModelBackend> make_backend(const std::string& spec, const env::Suite& suite);
std::shared_ptr<grounding::VisualGrounder> make_grounder(const std::string& spec, const env::Suite& suite,
                                                         std::shared_ptr<ModelBackend>& owned_backend);

/// Seeded harness-level choices.
std::vector<std::size_t> task_order(const env::Suite& suite, std::uint64_t seed, bool shuffle);
env::DesktopState with_distractor(const env::DesktopState& state, const std::string& task_id, std::uint64_t seed);

/// Runs every (budget, task) pair. Episode-level problems are recorded in the trajectories;
/// only configuration errors throw. When out_dir is set, writes steps.jsonl, episodes.jsonl,
/// report.json, report.txt and config.json there (log lines in commit order regardless of
/// parallelism).
SuiteResult run_suite(const RunConfig& config);
SuiteResult run_suite(const RunConfig& config, const env::Suite& suite);

/// Rebuilds the report from a log directory's episodes.jsonl.
SuiteReport report_from_logs(const std::filesystem::path& log_dir);

/// Problems found in a suite: unknown evaluators, tasks without scripts, bad rules. Empty when
/// the suite is usable. Loading errors throw.
std::vector<std::string> validate_suite(const env::Suite& suite);

}  // namespace mogplan::harness
