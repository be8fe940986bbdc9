#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mogplan/backend/parsers.hpp"
#include "mogplan/core/error.hpp"
#include "mogplan/planning/planning.hpp"

using namespace mogplan;
using namespace mogplan::planning;

namespace {

const char* kTogglesTask = R"(
id: toggles
category: workflow
instruction: Turn on alpha, beta and gamma.
apps:
  - id: settings
    name: Settings
    flags: {alpha: false, beta: false, gamma: false}
    elements:
      - {id: alpha, label: Alpha switch, bbox: [40, 40, 200, 28], flag: alpha, on_click: [toggle alpha]}
      - {id: beta, label: Beta switch, bbox: [40, 80, 200, 28], flag: beta, on_click: [toggle beta]}
      - {id: gamma, label: Gamma switch, bbox: [40, 120, 200, 28], flag: gamma, on_click: [toggle gamma]}
      - {id: note, label: Note, kind: text-field, bbox: [40, 160, 300, 28]}
    keybindings:
      ctrl+2: [toggle beta]
  - id: mail
    name: Mail
    elements:
      - {id: body, label: Body, kind: text-field, bbox: [40, 40, 300, 28]}
evaluator:
  name: all_of
  params:
    checks:
      - {name: flag_equals, params: {app: settings, flag: alpha, value: true}}
      - {name: flag_equals, params: {app: settings, flag: beta, value: true}}
      - {name: flag_equals, params: {app: settings, flag: gamma, value: true}}
)";

// Straight run: three subgoals, each one click and done.
const char* kStraightScript = R"(
- {role: manager, contains: "Turn on gamma [SUCCESS]", response: DONE}
- {role: manager, contains: "Turn on beta [SUCCESS]", response: "1. Turn on gamma"}
- {role: manager, contains: "Turn on alpha [SUCCESS]", response: "1. Turn on beta\n2. Turn on gamma"}
- {role: manager, response: "1. Turn on alpha\n2. Turn on beta\n3. Turn on gamma"}
- {role: worker, contains: ["Turn on alpha", "subgoal: 0."], response: 'click(element_description="Alpha switch")'}
- {role: worker, contains: ["Turn on beta", "subgoal: 0."], response: 'click(element_description="Beta switch")'}
- {role: worker, contains: ["Turn on gamma", "subgoal: 0."], response: 'click(element_description="Gamma switch")'}
- {role: worker, contains: "subgoal: 1.", response: done()}
)";

// The first attempt at beta fails; the recovery uses the keyboard.
const char* kRecoveryScript = R"(
- {role: manager, contains: "Turn on gamma [SUCCESS]", response: DONE}
- {role: manager, contains: "Turn on beta by keyboard [SUCCESS]", response: "1. Turn on gamma"}
- {role: manager, contains: "[FAILURE]", response: "1. Turn on beta by keyboard\n2. Turn on gamma"}
- {role: manager, contains: "Turn on alpha [SUCCESS]", response: "1. Turn on beta\n2. Turn on gamma"}
- {role: manager, response: "1. Turn on alpha\n2. Turn on beta\n3. Turn on gamma"}
- {role: worker, contains: ["Turn on beta by keyboard", "subgoal: 0."], response: 'hotkey(keys=["ctrl", "2"])'}
- {role: worker, contains: ["Turn on alpha", "subgoal: 0."], response: 'click(element_description="Alpha switch")'}
- {role: worker, contains: ["Turn on beta\n"], response: fail()}
- {role: worker, contains: ["Turn on gamma", "subgoal: 0."], response: 'click(element_description="Gamma switch")'}
- {role: worker, contains: "subgoal: 1.", response: done()}
)";

struct Harness {
  env::TaskSpec task;
  ScriptedBackend backend;
  grounding::TokenOverlapGrounder grounder;

  Harness(const char* task_yaml, const char* script)
      : task(testkit::task_from_yaml(task_yaml)), backend(parse_scripted_rules(env::yaml_to_json(script))) {}

  EpisodeRecord run(PlanningMode mode, int budget = 15, const std::string& context = "toggles@15") {
    EpisodeOptions options;
    options.mode = mode;
    options.budget = budget;
    options.context_id = context;
    options.visual = &grounder;
    return run_episode(task, task.initial_state, options, backend);
  }
};

int concluded(const EpisodeRecord& r) {
  int n = 0;
  for (const auto& g : r.subgoals) n += g.status == SubgoalStatus::Success || g.status == SubgoalStatus::Failure;
  return n;
}

int failures(const EpisodeRecord& r) {
  int n = 0;
  for (const auto& g : r.subgoals) n += g.status == SubgoalStatus::Failure;
  return n;
}

bool prefix_shaped(const EpisodeRecord& r) {
  bool pending_seen = false;
  for (const auto& g : r.subgoals) {
    if (g.status == SubgoalStatus::Active) return false;
    if (g.status == SubgoalStatus::Pending) pending_seen = true;
    else if (pending_seen) return false;
  }
  return true;
}

}  // namespace

TEST(Subgoal, LifecycleOnlyMovesForward) {
  Subgoal g{"x"};
  EXPECT_THROW(g.conclude(Verdict::Success), std::logic_error);
  g.activate();
  EXPECT_EQ(g.status, SubgoalStatus::Active);
  EXPECT_THROW(g.activate(), std::logic_error);
  g.conclude(Verdict::Failure);
  EXPECT_EQ(g.status, SubgoalStatus::Failure);
  EXPECT_THROW(g.conclude(Verdict::Success), std::logic_error);
  EXPECT_THROW(g.activate(), std::logic_error);
}

TEST(Plan, ReplacingPendingKeepsTheConcludedPrefix) {
  Plan plan{"do it", {}, 0};
  plan.replace_pending({"a", "b", "c"});
  EXPECT_EQ(plan.revision, 1);
  plan.next_pending()->activate();
  EXPECT_TRUE(plan.well_formed());
  plan.subgoals[0].conclude(Verdict::Success);
  plan.replace_pending({"d"});
  ASSERT_EQ(plan.subgoals.size(), 2u);
  EXPECT_EQ(plan.subgoals[0].text, "a");
  EXPECT_EQ(plan.subgoals[1].text, "d");
  EXPECT_EQ(plan.revision, 2);
  EXPECT_TRUE(plan.well_formed());
  EXPECT_EQ(plan.concluded().size(), 1u);
}

TEST(Plan, ShapeViolationsAreDetected) {
  Plan plan{"x", {Subgoal{"a"}, Subgoal{"b"}}, 1};
  plan.subgoals[1].activate();
  EXPECT_FALSE(plan.well_formed());
  Plan two_active{"x", {Subgoal{"a"}, Subgoal{"b"}}, 1};
  two_active.subgoals[0].activate();
  two_active.subgoals[1].activate();
  EXPECT_FALSE(two_active.well_formed());
}

TEST(ManagerPlan, ScriptedListBecomesPendingSubgoals) {
  ScriptedBackend backend({ScriptedRule{ModelRole::Manager, {}, 1, {}, "1. open settings\n2. disable dim screen"},
                           ScriptedRule{ModelRole::Manager, {}, 2, {}, "1. search for blank screen setting"}});
  const env::Observation obs;
  TaskMemory memory;
  auto first = manager_plan("Keep the screen on", obs, {}, memory, backend, "t");
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].text, "open settings");
  EXPECT_EQ(first[1].status, SubgoalStatus::Pending);

  Plan plan{"Keep the screen on", {}, 0};
  plan.replace_pending({first[0].text, first[1].text});
  plan.subgoals[0].activate();
  plan.subgoals[0].conclude(Verdict::Success);
  const auto second = manager_plan(plan.instruction, obs, plan.concluded(), memory, backend, "t");
  std::vector<std::string> texts;
  for (const auto& g : second) texts.push_back(g.text);
  plan.replace_pending(texts);
  ASSERT_EQ(plan.subgoals.size(), 2u);
  EXPECT_EQ(plan.subgoals[0].status, SubgoalStatus::Success);
  EXPECT_EQ(plan.subgoals[1].text, "search for blank screen setting");
  EXPECT_EQ(plan.revision, 2);
}

TEST(ManagerPlan, PromptCarriesInstructionPriorSubgoalsAndMemory) {
  TaskMemory memory;
  memory.append("order 4821");
  Subgoal done_one{"open the app", SubgoalStatus::Success};
  Subgoal failed_one{"find the box", SubgoalStatus::Failure};
  const auto prompt = manager_prompt("Copy the order", env::Observation{}, {done_one, failed_one}, memory);
  EXPECT_NE(prompt.find("Copy the order"), std::string::npos);
  EXPECT_NE(prompt.find("1. open the app [SUCCESS]"), std::string::npos);
  EXPECT_NE(prompt.find("2. find the box [FAILURE]"), std::string::npos);
  EXPECT_NE(prompt.find("- order 4821"), std::string::npos);
}

TEST(ManagerPlan, NoListIsAnEmptyPlan) {
  ScriptedBackend backend({ScriptedRule{ModelRole::Manager, {}, {}, {}, "no steps needed"}});
  try {
    manager_plan("x", env::Observation{}, {}, TaskMemory{}, backend, "t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyPlan);
  }
}

TEST(WorkerStep, ParsesTheCallAndKeepsTheRawReply) {
  ScriptedBackend backend({ScriptedRule{ModelRole::Worker, {}, {}, {},
                                        R"(click(element_description="Save As", num_clicks=1, button_type="left", hold_keys=[]))"}});
  Subgoal g{"save", SubgoalStatus::Active};
  const auto reply = worker_step(g, env::Observation{}, {}, TaskMemory{}, backend, "t", "");
  EXPECT_EQ(reply.action, Action(actions::Click{"Save As"}));
  EXPECT_FALSE(reply.raw.empty());
}

TEST(WorkerStep, ProseIsAParseError) {
  ScriptedBackend backend({ScriptedRule{ModelRole::Worker, {}, {}, {}, "I would press the button."}});
  Subgoal g{"save", SubgoalStatus::Active};
  std::string raw;
  EXPECT_THROW(worker_step(g, env::Observation{}, {}, TaskMemory{}, backend, "t", "", &raw), ParseError);
  EXPECT_EQ(raw, "I would press the button.");
}

TEST(Episode, ProactiveReplansAfterEverySubgoal) {
  Harness h(kTogglesTask, kStraightScript);
  const auto r = h.run(PlanningMode::Proactive);
  EXPECT_EQ(r.termination, Termination::Completed);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_EQ(r.steps_used(), 6);
  EXPECT_EQ(concluded(r), 3);
  EXPECT_EQ(r.manager_invocations, 4);
  EXPECT_EQ(r.plan_revision, 4);
}

TEST(Episode, ReactiveKeepsThePlanAfterSuccess) {
  Harness h(kTogglesTask, kStraightScript);
  const auto r = h.run(PlanningMode::Reactive);
  EXPECT_EQ(r.termination, Termination::Completed);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_EQ(r.manager_invocations, 1);
  EXPECT_EQ(r.plan_revision, 1);
}

TEST(Episode, ReactiveReplansOnlyAfterFailure) {
  Harness h(kTogglesTask, kRecoveryScript);
  const auto r = h.run(PlanningMode::Reactive);
  EXPECT_EQ(r.termination, Termination::Completed);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_EQ(failures(r), 1);
  EXPECT_EQ(r.manager_invocations, 2);
}

TEST(Episode, ProactiveCountsEveryConcludedSubgoal) {
  Harness h(kTogglesTask, kRecoveryScript);
  const auto r = h.run(PlanningMode::Proactive);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_EQ(concluded(r), 4);
  EXPECT_EQ(r.manager_invocations, 5);
}

TEST(Episode, WorkerOnlyNeverCallsTheManager) {
  Harness h(kTogglesTask, R"(
- {role: worker, contains: "subgoal: 0.", response: 'click(element_description="Alpha switch")'}
- {role: worker, response: done()}
)");
  const auto r = h.run(PlanningMode::WorkerOnly);
  EXPECT_EQ(r.manager_invocations, 0);
  EXPECT_EQ(r.steps_used(), 2);
  ASSERT_EQ(r.subgoals.size(), 1u);
  EXPECT_EQ(r.subgoals[0].text, h.task.instruction);
  EXPECT_EQ(r.termination, Termination::Completed);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Episode, WorkerOnlyDoneOnFirstStep) {
  Harness h(kTogglesTask, "- {role: worker, response: done()}");
  EpisodeOptions options;
  options.budget = 15;
  options.context_id = "t";
  const auto r = worker_only_mode(h.task, h.task.initial_state, options, h.backend);
  EXPECT_EQ(r.steps_used(), 1);
  EXPECT_EQ(r.mode, PlanningMode::WorkerOnly);
}

TEST(Episode, BudgetExhaustionScoresZero) {
  Harness h(kTogglesTask, R"(
- {role: manager, response: "1. Turn on alpha"}
- {role: worker, response: 'wait(time=1)'}
)");
  const auto r = h.run(PlanningMode::Proactive, 15);
  EXPECT_EQ(r.steps_used(), 15);
  EXPECT_EQ(r.termination, Termination::BudgetExhausted);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.manager_invocations, 1);
  EXPECT_EQ(r.subgoals[0].status, SubgoalStatus::Failure);
}

TEST(Episode, SixteenActionsDoNotFitInFifteen) {
  Harness h(kTogglesTask, R"(
- {role: manager, contains: "[SUCCESS]", response: DONE}
- {role: manager, response: "1. Turn on everything"}
- {role: worker, ordinal: 14, response: 'click(element_description="Alpha switch")'}
- {role: worker, ordinal: 15, response: 'click(element_description="Beta switch")'}
- {role: worker, ordinal: 16, response: 'click(element_description="Gamma switch")'}
- {role: worker, ordinal: 17, response: done()}
- {role: worker, response: 'wait(time=1)'}
)");
  EXPECT_EQ(h.run(PlanningMode::Proactive, 15, "a").termination, Termination::BudgetExhausted);
  const auto long_run = h.run(PlanningMode::Proactive, 50, "b");
  EXPECT_EQ(long_run.termination, Termination::Completed);
  EXPECT_EQ(long_run.steps_used(), 17);
  EXPECT_EQ(long_run.reward, 1.0);
}

TEST(Episode, ParseErrorIsRetriedOnceWithAHint) {
  Harness h(kTogglesTask, R"(
- {role: manager, contains: "[SUCCESS]", response: DONE}
- {role: manager, response: "1. Turn on alpha"}
- {role: worker, contains: ["could not be used"], response: 'click(element_description="Alpha switch")'}
- {role: worker, contains: "subgoal: 1.", response: done()}
- {role: worker, response: "Let me think about where alpha is."}
)");
  const auto r = h.run(PlanningMode::Proactive);
  ASSERT_EQ(r.steps_used(), 3);
  ASSERT_TRUE(r.steps[0].error.has_value());
  EXPECT_EQ(r.steps[0].error->kind, ErrorKind::ParseError);
  EXPECT_FALSE(r.steps[0].action.has_value());
  EXPECT_EQ(r.steps[0].raw_output, "Let me think about where alpha is.");
  EXPECT_FALSE(r.steps[1].error.has_value());
  EXPECT_EQ(r.subgoals[0].status, SubgoalStatus::Success);
}

TEST(Episode, SecondParseErrorFailsTheSubgoal) {
  Harness h(kTogglesTask, R"(
- {role: manager, contains: "[FAILURE]", response: DONE}
- {role: manager, response: "1. Turn on alpha"}
- {role: worker, response: "Still thinking."}
)");
  const auto r = h.run(PlanningMode::Reactive);
  EXPECT_EQ(r.steps_used(), 2);
  EXPECT_EQ(r.subgoals[0].status, SubgoalStatus::Failure);
  EXPECT_EQ(r.manager_invocations, 2);
  EXPECT_EQ(r.termination, Termination::Completed);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Episode, BackendErrorAbortsWithoutUsingAStep) {
  Harness h(kTogglesTask, "- {role: manager, response: \"1. Turn on alpha\"}");
  const auto r = h.run(PlanningMode::Proactive);
  EXPECT_EQ(r.termination, Termination::Aborted);
  EXPECT_EQ(r.steps_used(), 0);
  ASSERT_TRUE(r.planning_error.has_value());
  EXPECT_EQ(r.planning_error->kind, ErrorKind::NoRule);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Episode, InitialEmptyPlanAborts) {
  Harness h(kTogglesTask, "- {role: manager, response: \"Nothing to do.\"}");
  const auto r = h.run(PlanningMode::Proactive);
  EXPECT_EQ(r.termination, Termination::Aborted);
  EXPECT_EQ(r.manager_invocations, 1);
  ASSERT_TRUE(r.planning_error.has_value());
  EXPECT_EQ(r.planning_error->kind, ErrorKind::EmptyPlan);
}

TEST(Episode, GroundingErrorsAreRecordedAndConsumeAStep) {
  Harness h(kTogglesTask, R"(
- {role: manager, contains: "[SUCCESS]", response: DONE}
- {role: manager, response: "1. Turn on alpha"}
- {role: worker, contains: "subgoal: 0.", response: 'click(element_description="quantum flux capacitor")'}
- {role: worker, response: done()}
)");
  const auto r = h.run(PlanningMode::Proactive);
  ASSERT_EQ(r.steps_used(), 2);
  ASSERT_TRUE(r.steps[0].error.has_value());
  EXPECT_EQ(r.steps[0].error->kind, ErrorKind::NoMatch);
  EXPECT_EQ(r.steps[0].route, Expert::Visual);
}

TEST(Episode, MemoryIsFilledAndStartsEmptyNextTime) {
  Harness h(kTogglesTask, R"(
- {role: manager, contains: "- order 4821", response: DONE}
- {role: manager, response: "1. Note the order"}
- {role: worker, contains: "subgoal: 0.", response: 'save_to_knowledge(text="order 4821")'}
- {role: worker, contains: "- order 4821", response: done()}
)");
  const auto first = h.run(PlanningMode::Proactive, 15, "m1");
  EXPECT_EQ(first.memory, (std::vector<std::string>{"order 4821"}));
  EXPECT_EQ(first.termination, Termination::Completed);
  const auto second = h.run(PlanningMode::Proactive, 15, "m2");
  EXPECT_EQ(second, first);
}

TEST(Episode, ReplayIsDeterministic) {
  Harness a(kTogglesTask, kRecoveryScript);
  Harness b(kTogglesTask, kRecoveryScript);
  EXPECT_EQ(a.run(PlanningMode::Proactive), b.run(PlanningMode::Proactive));
}

TEST(Episode, RejectsANonPositiveBudget) {
  Harness h(kTogglesTask, kStraightScript);
  EXPECT_THROW(h.run(PlanningMode::Proactive, 0), Error);
}

// Random scripts: every counter law must hold whatever the models say.
TEST(Episode, CounterAndBudgetLawsHoldOnRandomScripts) {
  const std::vector<std::string> worker_pool = {
      "done()", "fail()", "wait(time=1)", "I am not sure yet.", R"(click(element_description="Alpha switch"))",
      R"(click(element_description="quantum flux"))", R"(switch_applications(app_name="Nowhere"))",
      R"(save_to_knowledge(text="note"))", R"(highlight_text_span(starting_phrase="a", ending_phrase="b"))",
      R"(type(element_description="Note", text="hi"))"};
  const std::vector<std::string> manager_pool = {"1. A\n2. B", "1. C", "DONE", "- D\n- E\n- F", "1. G"};
  testkit::Rng rng(61);
  const auto task = testkit::task_from_yaml(kTogglesTask);
  const grounding::TokenOverlapGrounder grounder;
  for (int round = 0; round < 400; ++round) {
    std::vector<ScriptedRule> rules;
    for (int i = 1; i <= 12; ++i)
      rules.push_back({ModelRole::Manager, {}, i, {}, manager_pool[testkit::uniform(rng, 0, 4)]});
    for (int i = 1; i <= 60; ++i)
      rules.push_back({ModelRole::Worker, {}, i, {}, worker_pool[testkit::uniform(rng, 0, 9)]});
    rules.push_back({ModelRole::Manager, {}, {}, {}, "DONE"});
    rules.push_back({ModelRole::Worker, {}, {}, {}, "done()"});
    const auto mode = static_cast<PlanningMode>(testkit::uniform(rng, 0, 2));
    const int budget = testkit::uniform(rng, 1, 20);
    ScriptedBackend backend(rules);
    EpisodeOptions options;
    options.mode = mode;
    options.budget = budget;
    options.context_id = "r";
    options.visual = &grounder;
    const auto r = run_episode(task, task.initial_state, options, backend);

    ASSERT_LE(r.steps_used(), budget);
    if (r.termination == Termination::BudgetExhausted) ASSERT_EQ(r.steps_used(), budget);
    if (r.termination != Termination::Completed) ASSERT_EQ(r.reward, 0.0);
    ASSERT_TRUE(prefix_shaped(r));
    const int exhausted = r.termination == Termination::BudgetExhausted ? 1 : 0;
    if (mode == PlanningMode::Proactive) ASSERT_EQ(r.manager_invocations, 1 + concluded(r) - exhausted);
    if (mode == PlanningMode::Reactive) ASSERT_EQ(r.manager_invocations, 1 + failures(r) - exhausted);
    if (mode == PlanningMode::WorkerOnly) ASSERT_EQ(r.manager_invocations, 0);
    int per_subgoal = 0;
    for (const auto& g : r.subgoals) per_subgoal += g.steps_used;
    ASSERT_EQ(per_subgoal, r.steps_used());
    for (std::size_t i = 0; i < r.steps.size(); ++i) ASSERT_EQ(r.steps[i].step, static_cast<int>(i) + 1);
  }
}
