#include "mogplan/planning/planning.hpp"

#include <stdexcept>

#include "mogplan/backend/parsers.hpp"
#include "mogplan/core/prompts.hpp"
#include "mogplan/env/transition.hpp"

namespace mogplan::planning {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::pair<E, std::string_view> (&table)[N], std::string_view name) {
  for (const auto& [value, text] : table)
    if (text == name) return value;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
  for (const auto& [v, text] : table)
    if (v == value) return text;
  return "?";
}

constexpr std::pair<SubgoalStatus, std::string_view> kStatusNames[] = {
    {SubgoalStatus::Pending, "pending"},
    {SubgoalStatus::Active, "active"},
    {SubgoalStatus::Success, "success"},
    {SubgoalStatus::Failure, "failure"},
};
constexpr std::pair<PlanningMode, std::string_view> kModeNames[] = {
    {PlanningMode::Proactive, "proactive"},
    {PlanningMode::Reactive, "reactive"},
    {PlanningMode::WorkerOnly, "worker-only"},
};
constexpr std::pair<Termination, std::string_view> kTerminationNames[] = {
    {Termination::Completed, "Completed"},
    {Termination::BudgetExhausted, "BudgetExhausted"},
    {Termination::Aborted, "Aborted"},
};
constexpr std::pair<FailureTag, std::string_view> kTagNames[] = {
    {FailureTag::Planning, "Planning"},     {FailureTag::Grounding, "Grounding"},
    {FailureTag::Interaction, "Interaction"}, {FailureTag::Navigation, "Navigation"},
    {FailureTag::Infeasible, "Infeasible"},
};

std::string numbered_subgoals(const std::vector<Subgoal>& prior) {
  if (prior.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (i) out += "\n";
    out += std::to_string(i + 1) + ". " + prior[i].text;
    if (prior[i].status == SubgoalStatus::Success) out += " [SUCCESS]";
    if (prior[i].status == SubgoalStatus::Failure) out += " [FAILURE]";
  }
  return out;
}

std::string memory_lines(const TaskMemory& memory) {
  if (memory.entries().empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < memory.entries().size(); ++i) {
    if (i) out += "\n";
    out += "- " + memory.entries()[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(SubgoalStatus status) { return name_of(kStatusNames, status); }
std::string_view to_string(PlanningMode mode) { return name_of(kModeNames, mode); }
std::string_view to_string(Termination termination) { return name_of(kTerminationNames, termination); }
std::string_view to_string(FailureTag tag) { return name_of(kTagNames, tag); }
std::optional<PlanningMode> planning_mode_from_string(std::string_view name) { return lookup(kModeNames, name); }
std::optional<Termination> termination_from_string(std::string_view name) { return lookup(kTerminationNames, name); }
std::optional<FailureTag> failure_tag_from_string(std::string_view name) { return lookup(kTagNames, name); }

void Subgoal::activate() {
  if (status != SubgoalStatus::Pending) throw std::logic_error("only a pending subgoal can become active");
  status = SubgoalStatus::Active;
}

void Subgoal::conclude(Verdict verdict) {
  if (status != SubgoalStatus::Active) throw std::logic_error("only an active subgoal can conclude");
  status = verdict == Verdict::Success ? SubgoalStatus::Success : SubgoalStatus::Failure;
}

void Plan::replace_pending(const std::vector<std::string>& texts) {
  std::erase_if(subgoals, [](const Subgoal& g) { return g.status == SubgoalStatus::Pending; });
  for (const auto& t : texts) subgoals.push_back(Subgoal{t, SubgoalStatus::Pending, {}});
  ++revision;
}

Subgoal* Plan::next_pending() {
  for (auto& g : subgoals)
    if (g.status == SubgoalStatus::Pending) return &g;
  return nullptr;
}

std::vector<Subgoal> Plan::concluded() const {
  std::vector<Subgoal> out;
  for (const auto& g : subgoals)
    if (g.concluded()) out.push_back(g);
  return out;
}

bool Plan::well_formed() const {
  // Shape: concluded* active? pending*
  int phase = 0;
  int active = 0;
  for (const auto& g : subgoals) {
    const int p = g.concluded() ? 0 : g.status == SubgoalStatus::Active ? 1 : 2;
    if (p < phase) return false;
    phase = p;
    active += p == 1;
  }
  return active <= 1;
}

std::string manager_prompt(const std::string& instruction, const env::Observation& obs,
                           const std::vector<Subgoal>& prior, const TaskMemory& memory, const PromptLimits& limits) {
  return render_prompt(prompt_template("manager"), {{"instruction", instruction},
                                                     {"prior_subgoals", numbered_subgoals(prior)},
                                                     {"memory", memory_lines(memory)},
                                                     {"observation", env::observation_digest(obs, limits.digest_chars)}});
}

std::string worker_prompt(const Subgoal& subgoal, const env::Observation& obs, const std::vector<Action>& history,
                          const TaskMemory& memory, const std::string& hint, const PromptLimits& limits) {
  std::string lines;
  for (std::size_t i = 0; i < history.size(); ++i) lines += std::to_string(i + 1) + ". " + history[i].to_call() + "\n";
  std::string hint_block;
  if (!hint.empty())
    hint_block = "\nYour previous reply could not be used: " + hint +
                 "\nReply again and end with exactly one valid action call.\n";
  return render_prompt(prompt_template("worker"), {{"subgoal", subgoal.text},
                                                    {"action_count", std::to_string(history.size())},
                                                    {"history", lines},
                                                    {"memory", memory_lines(memory)},
                                                    {"observation", env::observation_digest(obs, limits.digest_chars)},
                                                    {"hint", hint_block}});
}

std::vector<Subgoal> manager_plan(const std::string& instruction, const env::Observation& obs,
                                  const std::vector<Subgoal>& prior, const TaskMemory& memory, ModelBackend& backend,
                                  const std::string& context_id, const PromptLimits& limits) {
  const std::string reply =
      backend.complete({ModelRole::Manager, manager_prompt(instruction, obs, prior, memory, limits), context_id});
  std::vector<Subgoal> out;
  for (auto& text : parse_plan(reply)) out.push_back(Subgoal{std::move(text), SubgoalStatus::Pending, {}});
  return out;
}

WorkerReply worker_step(const Subgoal& subgoal, const env::Observation& obs, const std::vector<Action>& history,
                        const TaskMemory& memory, ModelBackend& backend, const std::string& context_id,
                        const std::string& hint, std::string* raw_out, const PromptLimits& limits) {
  std::string raw =
      backend.complete({ModelRole::Worker, worker_prompt(subgoal, obs, history, memory, hint, limits), context_id});
  if (raw_out) *raw_out = raw;
  Action action = parse_action_call(raw);
  return WorkerReply{std::move(raw), std::move(action)};
}

namespace {

std::vector<std::string> targets_of(const GroundedAction& g, const env::Observation& obs, const env::DesktopState& state) {
  std::vector<std::string> out;
  auto element_or_cell = [&](PointCoordinate p) {
    const env::AppState& app = state.focused();
    if (app.sheet && app.sheet->layout.area.contains(p)) {
      const auto& view = *app.sheet;
      if (auto cell = env::cell_at(view.workbook.sheet(view.active_sheet), view.layout, p)) {
        const auto* hit = env::element_at(obs, p);
        if (!hit || hit->kind != env::ElementKind::Tab)
          return grounding::format_a1({view.active_sheet, cell->column, cell->row});
      }
    }
    if (const auto* hit = env::element_at(obs, p)) return hit->id;
    return std::string("(") + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
  };
  for (const auto& p : g.points) out.push_back(element_or_cell(p));
  if (g.span) {
    out.push_back(element_or_cell(g.span->start));
    if (out.back() != element_or_cell(g.span->end)) out.push_back(element_or_cell(g.span->end));
  }
  for (const auto& w : g.cell_writes) out.push_back(grounding::format_a1(w.address));
  for (const auto& [p, _] : g.point_writes) out.push_back(element_or_cell(p));
  return out;
}

class EpisodeRunner {
 public:
  EpisodeRunner(const env::TaskSpec& task, const env::DesktopState& initial, const EpisodeOptions& options,
                ModelBackend& backend)
      : task_(task), state_(initial), options_(options), backend_(backend) {
    record_.task_id = task.id;
    record_.category = task.category;
    record_.mode = options.mode;
    record_.budget = options.budget;
    record_.mog_enabled = options.mog_enabled;
    plan_.instruction = task.instruction;
  }

  EpisodeRecord run() {
    if (options_.mode == PlanningMode::WorkerOnly) {
      plan_.subgoals.push_back(Subgoal{task_.instruction, SubgoalStatus::Pending, {}});
      const auto outcome = run_subgoal(0);
      if (outcome) record_.termination = Termination::Completed;
      return finish();
    }
    if (!replan(true)) return finish();
    for (;;) {
      Subgoal* next = plan_.next_pending();
      if (!next) {
        // Only reachable in reactive mode after a successful final subgoal.
        record_.termination = Termination::Completed;
        break;
      }
      const std::size_t index = static_cast<std::size_t>(next - plan_.subgoals.data());
      const auto outcome = run_subgoal(index);
      if (!outcome) break;
      const bool must_replan = options_.mode == PlanningMode::Proactive || outcome->verdict == Verdict::Failure;
      if (must_replan && !replan(false)) break;
    }
    return finish();
  }

 private:
  // Returns false when the episode ends (completion or abort).
  bool replan(bool initial) {
    const env::Observation obs = env::render(state_);
    ++record_.manager_invocations;
    std::vector<Subgoal> fresh;
    try {
      fresh = manager_plan(plan_.instruction, obs, plan_.concluded(), memory_, backend_, options_.context_id,
                           options_.limits);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::EmptyPlan && !initial) {
        fresh.clear();
      } else {
        record_.planning_error = StepError{e.kind(), e.message()};
        record_.termination = Termination::Aborted;
        return false;
      }
    }
    std::vector<std::string> texts;
    for (auto& g : fresh) texts.push_back(std::move(g.text));
    plan_.replace_pending(texts);
    if (texts.empty()) {
      record_.termination = Termination::Completed;
      return false;
    }
    return true;
  }

  // Runs the subgoal at `index` to a verdict; nullopt when the episode must stop.
  std::optional<SubgoalOutcome> run_subgoal(std::size_t index) {
    plan_.subgoals[index].activate();
    std::vector<Action> history;
    std::string hint;
    int parse_failures = 0;
    int used = 0;
    for (;;) {
      if (record_.steps_used() >= options_.budget) {
        plan_.subgoals[index].conclude(Verdict::Failure);
        record_.termination = Termination::BudgetExhausted;
        return std::nullopt;
      }
      Subgoal& subgoal = plan_.subgoals[index];
      const env::Observation obs = env::render(state_);
      StepRecord step;
      step.step = record_.steps_used() + 1;
      step.subgoal_index = static_cast<int>(index);
      step.subgoal = subgoal.text;
      step.observation = env::observation_digest(obs, options_.limits.digest_chars);

      std::string raw;
      Action action;
      try {
        action = worker_step(subgoal, obs, history, memory_, backend_, options_.context_id, hint, &raw,
                             options_.limits)
                     .action;
      } catch (const ParseError& e) {
        ++used;
        step.raw_output = raw;
        step.error = StepError{e.kind(), e.message()};
        record_.steps.push_back(std::move(step));
        env::advance(state_);
        if (++parse_failures >= 2) {
          subgoal.conclude(Verdict::Failure);
          return SubgoalOutcome{Verdict::Failure, used};
        }
        hint = e.reason();
        continue;
      } catch (const Error& e) {
        // Backend failures end the episode without consuming a step.
        subgoal.conclude(Verdict::Failure);
        record_.planning_error = StepError{e.kind(), e.message()};
        record_.termination = Termination::Aborted;
        return std::nullopt;
      }
      ++used;
      parse_failures = 0;
      hint.clear();
      record_.final_action = action;
      subgoal.actions.push_back(action);
      history.push_back(action);
      step.action = action;
      step.route = grounding::route(action).expert;
      if (!options_.mog_enabled && step.route != Expert::None) step.route = Expert::Visual;

      try {
        grounding::GroundingOptions gopts{options_.visual, options_.mog_enabled, options_.context_id};
        const GroundedAction grounded = grounding::ground(action, obs, state_, gopts);
        step.route = grounded.expert;
        step.points = grounded.points;
        step.span = grounded.span;
        step.cell_writes = grounded.cell_writes;
        step.point_writes = grounded.point_writes;
        step.targets = targets_of(grounded, obs, state_);
        state_ = env::apply(state_, grounded);
        if (const auto* note = action.get_if<actions::SaveToKnowledge>()) memory_.append(note->text);
      } catch (const Error& e) {
        step.error = StepError{e.kind(), e.message()};
        env::advance(state_);
      }
      record_.steps.push_back(std::move(step));

      if (action.kind() == ActionKind::Done || action.kind() == ActionKind::Fail) {
        const Verdict v = action.kind() == ActionKind::Done ? Verdict::Success : Verdict::Failure;
        subgoal.conclude(v);
        return SubgoalOutcome{v, used};
      }
    }
  }

  EpisodeRecord finish() {
    for (const auto& g : plan_.subgoals) {
      int used = 0;
      for (const auto& s : record_.steps) used += s.subgoal_index == static_cast<int>(&g - plan_.subgoals.data());
      record_.subgoals.push_back(SubgoalRecord{g.text, g.status, used});
    }
    record_.plan_revision = plan_.revision;
    record_.memory = memory_.entries();
    record_.reward = 0.0;
    if (record_.termination == Termination::Completed) {
      try {
        const auto* registry = options_.registry ? options_.registry : &env::EvaluatorRegistry::builtin();
        record_.reward = env::evaluate(task_, state_, record_.final_action.value_or(Action{}), *registry);
      } catch (const Error& e) {
        record_.planning_error = StepError{e.kind(), e.message()};
        record_.termination = Termination::Aborted;
      }
    }
    return record_;
  }

  const env::TaskSpec& task_;
  env::DesktopState state_;
  const EpisodeOptions& options_;
  ModelBackend& backend_;
  Plan plan_;
  TaskMemory memory_;
  EpisodeRecord record_;
};

}  // namespace

EpisodeRecord run_episode(const env::TaskSpec& task, const env::DesktopState& initial, const EpisodeOptions& options,
                          ModelBackend& backend) {
  if (options.budget < 1) throw Error(ErrorKind::InvalidConfig, "budget must be at least 1");
  return EpisodeRunner(task, initial, options, backend).run();
}

EpisodeRecord worker_only_mode(const env::TaskSpec& task, const env::DesktopState& initial,
                               const EpisodeOptions& options, ModelBackend& backend) {
  EpisodeOptions o = options;
  o.mode = PlanningMode::WorkerOnly;
  return run_episode(task, initial, o, backend);
}

}  // namespace mogplan::planning
