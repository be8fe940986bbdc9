#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mogplan/backend/action.hpp"
#include "mogplan/backend/backend.hpp"
#include "mogplan/core/error.hpp"
#include "mogplan/env/observation.hpp"
#include "mogplan/env/task.hpp"
#include "mogplan/grounding/grounding.hpp"

namespace mogplan::planning {

enum class SubgoalStatus { Pending, Active, Success, Failure };
enum class Verdict { Success, Failure };
enum class PlanningMode { Proactive, Reactive, WorkerOnly };
enum class Termination { Completed, BudgetExhausted, Aborted };

std::string_view to_string(SubgoalStatus status);
std::string_view to_string(PlanningMode mode);
std::string_view to_string(Termination termination);
std::optional<PlanningMode> planning_mode_from_string(std::string_view name);
std::optional<Termination> termination_from_string(std::string_view name);

struct Subgoal {
  std::string text;
  SubgoalStatus status = SubgoalStatus::Pending;
  std::vector<Action> actions;

  // Pending -> Active. Throws std::logic_error from any other state.
  void activate();
  // Active -> Success/Failure. Throws std::logic_error from any other state.
  void conclude(Verdict verdict);
  bool concluded() const { return status == SubgoalStatus::Success || status == SubgoalStatus::Failure; }
};

struct SubgoalOutcome {
  Verdict verdict = Verdict::Success;
  int steps_used = 1;
};

struct Plan {
  std::string instruction;
  std::vector<Subgoal> subgoals;
  int revision = 0;

  /// Drops every Pending subgoal, appends the new texts as Pending and bumps the revision.
  void replace_pending(const std::vector<std::string>& texts);
  // First Pending subgoal, if any.
  Subgoal* next_pending();
  std::vector<Subgoal> concluded() const;
  // At most one Active; concluded subgoals form a prefix and Pending ones a suffix.
  bool well_formed() const;
};

/// Per-episode scratchpad filled by save_to_knowledge.
class TaskMemory {
 public:
  void append(std::string entry) { entries_.push_back(std::move(entry)); }
  const std::vector<std::string>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

 private:
  std::vector<std::string> entries_;
};

struct PromptLimits {
  std::size_t digest_chars = 4000;
};

std::string manager_prompt(const std::string& instruction, const env::Observation& obs,
                           const std::vector<Subgoal>& prior, const TaskMemory& memory,
                           const PromptLimits& limits = {});

std::string worker_prompt(const Subgoal& subgoal, const env::Observation& obs, const std::vector<Action>& history,
                          const TaskMemory& memory, const std::string& hint, const PromptLimits& limits = {});

/// Asks the manager for the remaining subgoals. Throws Error(EmptyPlan) when the reply holds no
/// list, and backend errors as raised.
std::vector<Subgoal> manager_plan(const std::string& instruction, const env::Observation& obs,
                                  const std::vector<Subgoal>& prior, const TaskMemory& memory, ModelBackend& backend,
                                  const std::string& context_id, const PromptLimits& limits = {});

struct WorkerReply {
  std::string raw;
  Action action;
};

/// One worker decision. Throws ParseError (with the raw reply available through `raw_out`)
/// or backend errors.
WorkerReply worker_step(const Subgoal& subgoal, const env::Observation& obs, const std::vector<Action>& history,
                        const TaskMemory& memory, ModelBackend& backend, const std::string& context_id,
                        const std::string& hint, std::string* raw_out = nullptr, const PromptLimits& limits = {});

enum class FailureTag { Planning, Grounding, Interaction, Navigation, Infeasible };

std::string_view to_string(FailureTag tag);
std::optional<FailureTag> failure_tag_from_string(std::string_view name);

struct StepError {
  ErrorKind kind = ErrorKind::ParseError;
  std::string message;

  bool operator==(const StepError&) const = default;
};

/// One worker-issued step.
struct StepRecord {
  int step = 0;  // 1-based
  int subgoal_index = 0;
  std::string subgoal;
  std::optional<Action> action;  // absent when the reply could not be parsed
  std::string raw_output;        // kept only for unparsable replies
  Expert route = Expert::None;
  std::vector<PointCoordinate> points;
  std::optional<SpanCoordinates> span;
  std::vector<CellWrite> cell_writes;
  std::vector<std::pair<PointCoordinate, std::string>> point_writes;
  // Element ids hit by points, or A1 references written.
  std::vector<std::string> targets;
  std::optional<StepError> error;
  std::string observation;  // digest the worker saw

  bool operator==(const StepRecord&) const = default;
};

struct SubgoalRecord {
  std::string text;
  SubgoalStatus status = SubgoalStatus::Pending;
  int steps_used = 0;

  bool operator==(const SubgoalRecord&) const = default;
};

struct EpisodeRecord {
  std::string task_id;
  std::string category;
  PlanningMode mode = PlanningMode::Proactive;
  int budget = 0;
  bool mog_enabled = true;
  std::vector<StepRecord> steps;
  std::vector<SubgoalRecord> subgoals;
  int manager_invocations = 0;
  int plan_revision = 0;
  Termination termination = Termination::Aborted;
  std::optional<StepError> planning_error;
  double reward = 0.0;
  std::optional<FailureTag> failure_tag;
  std::optional<Action> final_action;
  std::vector<std::string> memory;

  int steps_used() const { return static_cast<int>(steps.size()); }
  bool operator==(const EpisodeRecord&) const = default;
};

struct EpisodeOptions {
  PlanningMode mode = PlanningMode::Proactive;
  int budget = 15;
  bool mog_enabled = true;
  std::string context_id;
  const grounding::VisualGrounder* visual = nullptr;
  const env::EvaluatorRegistry* registry = nullptr;  // builtin when null
  PromptLimits limits;
};

/// Runs one episode from `initial` to completion, budget exhaustion or abort. Never throws for
/// model or grounding problems; they are recorded in the trajectory. The failure tag is left
/// empty (assigned by the harness).
EpisodeRecord run_episode(const env::TaskSpec& task, const env::DesktopState& initial, const EpisodeOptions& options,
                          ModelBackend& backend);

/// Worker-only variant: the instruction is the single subgoal and the manager is never called.
EpisodeRecord worker_only_mode(const env::TaskSpec& task, const env::DesktopState& initial,
                               const EpisodeOptions& options, ModelBackend& backend);

}  // namespace mogplan::planning
