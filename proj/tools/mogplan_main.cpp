#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mogplan/core/error.hpp"
#include "mogplan/grounding/grounding.hpp"
#include "mogplan/harness/harness.hpp"

namespace fs = std::filesystem;
using namespace mogplan;

namespace {

fs::path episodes_file(const fs::path& p) { return fs::is_directory(p) ? p / "episodes.jsonl" : p; }

std::string join_tags(const std::vector<harness::BehaviorTag>& tags) {
  if (tags.empty()) return "-";
  std::string out;
  for (auto t : tags) {
    if (!out.empty()) out += ",";
    out += harness::to_string(t);
  }
  return out;
}

int cmd_run(const harness::RunConfig& config, bool json_out) {
  const auto result = harness::run_suite(config);
  if (json_out)
    std::cout << harness::to_json(result.report).dump(2) << "\n";
  else
    std::cout << harness::render_text(result.report);
  if (!config.out_dir.empty()) std::cerr << "logs written to " << config.out_dir.string() << "\n";
  return result.report.errors.empty() ? 0 : 1;
}

int cmd_report(const fs::path& log_dir, bool json_out) {
  const auto report = harness::report_from_logs(log_dir);
  if (json_out)
    std::cout << harness::to_json(report).dump(2) << "\n";
  else
    std::cout << harness::render_text(report);
  return report.errors.empty() ? 0 : 1;
}

int cmd_diff(const fs::path& a, const fs::path& b) {
  const auto left = harness::read_episodes(episodes_file(a));
  const auto right = harness::read_episodes(episodes_file(b));
  std::map<std::pair<std::string, int>, const harness::EpisodeRecord*> by_key;
  for (const auto& r : left) by_key[{r.task_id, r.budget}] = &r;

  int matched = 0;
  for (const auto& r : right) {
    auto it = by_key.find({r.task_id, r.budget});
    if (it == by_key.end()) continue;
    ++matched;
    const auto d = harness::diff_runs(*it->second, r);
    std::cout << r.task_id << "@" << r.budget << "  reward " << it->second->reward << " -> " << r.reward << "  steps "
              << it->second->steps_used() << " -> " << r.steps_used() << "\n"
              << "  A: " << join_tags(d.a) << "\n"
              << "  B: " << join_tags(d.b) << "\n";
    if (!d.gained.empty()) std::cout << "  gained: " << join_tags(d.gained) << "\n";
    if (!d.lost.empty()) std::cout << "  lost: " << join_tags(d.lost) << "\n";
  }
  if (matched == 0) {
    std::cerr << "no episodes in common between the two logs\n";
    return 1;
  }
  return 0;
}

int cmd_validate(const fs::path& path) {
  const auto suite = env::load_suite(path);
  const auto problems = harness::validate_suite(suite);
  for (const auto& p : problems) std::cout << p << "\n";
  std::cout << suite.name << ": " << suite.tasks.size() << " tasks, "
            << (problems.empty() ? std::string("ok") : std::to_string(problems.size()) + " problem(s)") << "\n";
  return problems.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical GUI agent planner with a mixture of grounding experts"};
  app.require_subcommand(1);

  harness::RunConfig config;
  std::string mode = "proactive";
  std::string backend;
  std::string tag_overrides;
  bool no_mog = false;
  bool json_out = false;

  auto* run = app.add_subcommand("run", "Run every task of a suite and write trajectory logs");
  run->add_option("--suite", config.suite_path, "Suite file (suite.yaml)")->required();
  run->add_option("--mode", mode, "Planning mode")
      ->check(CLI::IsMember({"proactive", "reactive", "worker-only"}));
  run->add_option("--budget", config.budgets, "Step budget; repeat or comma-separate for several columns")
      ->delimiter(',');
  run->add_flag("--no-mog", no_mog, "Ground every action visually");
  run->add_option("--parallel", config.parallelism, "Episodes run concurrently");
  run->add_option("--seed", config.seed, "Seed for task order and distractor placement");
  run->add_option("--backend", backend, "Backend for manager and worker: scripted, scripted:<file>, remote:<cfg>");
  run->add_option("--manager-backend", config.manager_backend, "Backend for the manager only");
  run->add_option("--worker-backend", config.worker_backend, "Backend for the worker only");
  run->add_option("--grounder", config.grounder, "Visual grounder: mock, mock:<t>, scripted:<file>, remote:<cfg>");
  run->add_flag("--shuffle", config.shuffle, "Shuffle task order with the seed");
  run->add_flag("--distractors", config.distractors, "Inject a distractor popup into every task");
  run->add_option("--tag-overrides", tag_overrides, "JSON map of task[@budget] to failure tag");
  run->add_option("--out", config.out_dir, "Log directory");
  run->add_option("--digest-limit", config.digest_chars, "Characters of observation digest per prompt");
  run->add_flag("--json", json_out, "Print the report as JSON");

  fs::path report_dir;
  auto* report = app.add_subcommand("report", "Rebuild the report from a log directory");
  report->add_option("logdir", report_dir)->required()->check(CLI::ExistingDirectory);
  report->add_flag("--json", json_out, "Print the report as JSON");

  fs::path log_a;
  fs::path log_b;
  auto* diff = app.add_subcommand("diff", "Compare behaviour tags of two runs task by task");
  diff->add_option("logA", log_a)->required()->check(CLI::ExistingPath);
  diff->add_option("logB", log_b)->required()->check(CLI::ExistingPath);

  fs::path suite_path;
  auto* validate = app.add_subcommand("validate-suite", "Check a suite for loading and configuration problems");
  validate->add_option("path", suite_path)->required()->check(CLI::ExistingFile);

  auto* routes = app.add_subcommand("routing-table", "Print the action-to-expert routing table as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      config.mode = *planning::planning_mode_from_string(mode);
      config.mog_enabled = !no_mog;
      if (!backend.empty()) {
        if (run->count("--manager-backend") == 0) config.manager_backend = backend;
        if (run->count("--worker-backend") == 0) config.worker_backend = backend;
      }
      if (!tag_overrides.empty()) config.tag_overrides = tag_overrides;
      return cmd_run(config, json_out);
    }
    if (*report) return cmd_report(report_dir, json_out);
    if (*diff) return cmd_diff(log_a, log_b);
    if (*validate) return cmd_validate(suite_path);
    if (*routes) {
      std::cout << grounding::routing_table_json().dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
