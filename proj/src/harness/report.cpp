#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mogplan/harness/harness.hpp"

namespace mogplan::harness {

using nlohmann::json;

namespace {

// value/den to one decimal, round half up, integer arithmetic only.
std::string tenths(long long num, long long den) {
  if (den <= 0) return "n/a";
  const long long t = (num * 20 + den) / (2 * den);
  return std::to_string(t / 10) + "." + std::to_string(t % 10);
}

json tally_json(const Tally& t) {
  return {{"episodes", t.episodes},
          {"successes", t.successes},
          {"steps", t.steps},
          {"success_rate", percent(t.successes, t.episodes)},
          {"mean_steps", tenths(t.steps, t.episodes)}};
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string percent(int successes, int episodes) { return tenths(100LL * successes, episodes); }

SuiteReport build_report(const std::vector<EpisodeRecord>& records, const std::string& suite) {
  SuiteReport report;
  report.suite = suite;
  if (!records.empty()) {
    report.mode = std::string(planning::to_string(records.front().mode));
    report.mog_enabled = records.front().mog_enabled;
  }
  std::vector<int> budgets;
  for (const auto& r : records)
    if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
  std::sort(budgets.begin(), budgets.end());
  for (int b : budgets) {
    BudgetColumn col;
    col.budget = b;
    for (const auto& r : records) {
      if (r.budget != b) continue;
      const bool success = r.reward >= 1.0;
      for (Tally* t : {&col.overall, &col.by_category[r.category]}) {
        ++t->episodes;
        t->successes += success;
        t->steps += r.steps_used();
      }
      for (const auto& s : r.steps)
        if (s.action) ++col.routes[std::string(to_string(s.route))];
      ++col.terminations[std::string(planning::to_string(r.termination))];
      if (r.failure_tag) ++col.failure_tags[std::string(planning::to_string(*r.failure_tag))];
      col.manager_invocations += r.manager_invocations;
      if (r.planning_error && r.planning_error->kind == ErrorKind::InvalidConfig)
        report.errors.push_back(r.task_id + "@" + std::to_string(r.budget) + ": " + r.planning_error->message);
    }
    for (const char* expert : {"visual", "textual", "structural", "none"}) col.routes.try_emplace(expert, 0);
    report.columns.push_back(std::move(col));
  }
  return report;
}

json to_json(const SuiteReport& report) {
  json columns = json::array();
  for (const auto& c : report.columns) {
    json cats = json::object();
    for (const auto& [name, t] : c.by_category) cats[name] = tally_json(t);
    columns.push_back({{"budget", c.budget},
                       {"overall", tally_json(c.overall)},
                       {"by_category", cats},
                       {"routes", c.routes},
                       {"terminations", c.terminations},
                       {"failure_tags", c.failure_tags},
                       {"manager_invocations", c.manager_invocations}});
  }
  return {{"schema", kReportSchema},
          {"suite", report.suite},
          {"mode", report.mode},
          {"mog", report.mog_enabled},
          {"columns", columns},
          {"errors", report.errors}};
}

std::string render_text(const SuiteReport& report) {
  constexpr std::size_t kLabel = 26;
  constexpr std::size_t kCell = 18;
  std::ostringstream os;
  os << "Suite: " << (report.suite.empty() ? "(unnamed)" : report.suite) << "   mode: " << report.mode
     << "   grounding mixture: " << (report.mog_enabled ? "on" : "off") << "\n\n";

  auto row = [&](const std::string& label, auto&& cell) {
    os << pad(label, kLabel);
    for (const auto& c : report.columns) os << pad(cell(c), kCell);
    os << "\n";
  };
  auto rate = [](const Tally& t) {
    return std::to_string(t.successes) + "/" + std::to_string(t.episodes) + " (" + percent(t.successes, t.episodes) +
           "%)";
  };
  row("", [](const BudgetColumn& c) { return std::to_string(c.budget) + "-step"; });
  row("Success rate", [&](const BudgetColumn& c) { return rate(c.overall); });

  std::vector<std::string> categories;
  for (const auto& c : report.columns)
    for (const auto& [name, _] : c.by_category)
      if (std::find(categories.begin(), categories.end(), name) == categories.end()) categories.push_back(name);
  std::sort(categories.begin(), categories.end());
  for (const auto& cat : categories)
    row("  " + cat, [&](const BudgetColumn& c) {
      auto it = c.by_category.find(cat);
      return it == c.by_category.end() ? std::string("-") : rate(it->second);
    });
  row("Mean steps", [](const BudgetColumn& c) { return tenths(c.overall.steps, c.overall.episodes); });
  row("Manager invocations", [](const BudgetColumn& c) { return std::to_string(c.manager_invocations); });

  os << "\nRoutes (steps per expert)\n";
  for (const char* expert : {"visual", "textual", "structural", "none"})
    row(std::string("  ") + expert, [&](const BudgetColumn& c) {
      auto it = c.routes.find(expert);
      return std::to_string(it == c.routes.end() ? 0 : it->second);
    });

  os << "\nTerminations\n";
  for (const char* t : {"Completed", "BudgetExhausted", "Aborted"})
    row(std::string("  ") + t, [&](const BudgetColumn& c) {
      auto it = c.terminations.find(t);
      return std::to_string(it == c.terminations.end() ? 0 : it->second);
    });

  os << "\nFailure tags\n";
  for (const char* t : {"Planning", "Grounding", "Interaction", "Navigation", "Infeasible"})
    row(std::string("  ") + t, [&](const BudgetColumn& c) {
      auto it = c.failure_tags.find(t);
      return std::to_string(it == c.failure_tags.end() ? 0 : it->second);
    });

  if (!report.errors.empty()) {
    os << "\nErrors\n";
    for (const auto& e : report.errors) os << "  " << e << "\n";
  }
  return os.str();
}

}  // namespace mogplan::harness
