#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "mogplan/core/error.hpp"
#include "mogplan/env/task.hpp"
#include "mogplan/harness/harness.hpp"

namespace mogplan::harness {

using nlohmann::json;
using env::Rect;

namespace {

[[noreturn]] void bad_config(const std::string& why) { throw Error(ErrorKind::InvalidConfig, why); }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string spec_argument(const std::string& spec, std::string_view prefix) { return spec.substr(prefix.size()); }

std::vector<ScriptedRule> rules_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open scripted rules " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = env::yaml_to_json(ss.str());
  } catch (const Error& e) {
    bad_config(path + ": " + e.message());
  }
  if (doc.is_object() && doc.contains("rules")) doc = doc["rules"];
  return parse_scripted_rules(doc);
}

std::vector<Rect> occupied(const env::DesktopState& s) {
  std::vector<Rect> out;
  for (const auto& app : s.apps) {
    for (const auto& e : app.elements) out.push_back(e.element.bbox);
    if (app.document) out.push_back(app.document->layout.area);
    if (app.sheet) out.push_back(app.sheet->layout.area);
  }
  for (const auto& p : s.popups)
    for (const auto& e : p.elements) out.push_back(e.element.bbox);
  for (const auto& [_, p] : s.popup_library)
    for (const auto& e : p.elements) out.push_back(e.element.bbox);
  return out;
}

bool overlaps(const Rect& a, const Rect& b) {
  return a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) bad_config("cannot write " + path.string());
  out << text;
}

}  // namespace

void RunConfig::validate() const {
  if (budgets.empty()) bad_config("at least one budget is required");
  for (int b : budgets)
    if (b < 1) bad_config("budgets must be at least 1");
  std::set<int> unique(budgets.begin(), budgets.end());
  if (unique.size() != budgets.size()) bad_config("budgets must be distinct");
  if (parallelism < 1) bad_config("parallelism must be at least 1");
  if (digest_chars < 200) bad_config("digest limit must be at least 200 characters");
}

json RunConfig::to_json() const {
  return {{"suite", suite_path.generic_string()},
          {"mode", std::string(planning::to_string(mode))},
          {"budgets", budgets},
          {"mog", mog_enabled},
          {"manager_backend", manager_backend},
          {"worker_backend", worker_backend},
          {"grounder", grounder},
          {"parallelism", parallelism},
          {"seed", seed},
          {"shuffle", shuffle},
          {"distractors", distractors},
          {"digest_chars", digest_chars},
          {"tag_overrides", tag_overrides ? json(tag_overrides->generic_string()) : json(nullptr)}};
}

std::shared_ptr<ModelBackend> make_backend(const std::string& spec, const env::Suite& suite) {
  if (spec == "scripted") {
    auto backend = std::make_shared<ScriptedBackend>();
    for (const auto& task : suite.tasks) {
      try {
        backend->add_rules(parse_scripted_rules(task.script), task.id);
      } catch (const Error& e) {
        bad_config("task " + task.id + ": " + e.message());
      }
    }
    return backend;
  }
  if (spec.rfind("scripted:", 0) == 0)
    return std::make_shared<ScriptedBackend>(rules_from_file(spec_argument(spec, "scripted:")));
  if (spec.rfind("remote:", 0) == 0)
    return std::make_shared<RemoteBackend>(RemoteConfig::load(spec_argument(spec, "remote:")));
  bad_config("unknown backend \"" + spec + "\" (expected scripted, scripted:<file> or remote:<config>)");
}

std::shared_ptr<grounding::VisualGrounder> make_grounder(const std::string& spec, const env::Suite& suite,
                                                         std::shared_ptr<ModelBackend>& owned_backend) {
  if (spec == "mock") return std::make_shared<grounding::TokenOverlapGrounder>();
  if (spec.rfind("mock:", 0) == 0) {
    double threshold = 0;
    try {
      std::size_t used = 0;
      threshold = std::stod(spec_argument(spec, "mock:"), &used);
      if (used != spec.size() - 5) throw std::invalid_argument(spec);
    } catch (const std::exception&) {
      bad_config("bad grounder threshold in \"" + spec + "\"");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) bad_config("grounder threshold must be within [0, 1]");
    return std::make_shared<grounding::TokenOverlapGrounder>(threshold);
  }
  if (spec.rfind("scripted", 0) == 0 || spec.rfind("remote:", 0) == 0) {
    owned_backend = make_backend(spec, suite);
    return std::make_shared<grounding::BackendVisualGrounder>(*owned_backend);
  }
  bad_config("unknown grounder \"" + spec + "\" (expected mock, mock:<threshold>, scripted:<file> or remote:<config>)");
}

std::vector<std::size_t> task_order(const env::Suite& suite, std::uint64_t seed, bool shuffle) {
  std::vector<std::size_t> order(suite.tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

env::DesktopState with_distractor(const env::DesktopState& state, const std::string& task_id, std::uint64_t seed) {
  constexpr const char* kName = "distractor";
  for (const auto& p : state.popups)
    if (p.name == kName) return state;
  std::mt19937_64 rng(seed ^ fnv1a(task_id));
  const int w = 280;
  const int h = 40;
  if (state.screen.width <= w || state.screen.height <= h) return state;
  std::uniform_int_distribution<int> xs(0, state.screen.width - w);
  std::uniform_int_distribution<int> ys(0, state.screen.height - h);
  const auto taken = occupied(state);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const Rect box{xs(rng), ys(rng), w, h};
    if (std::any_of(taken.begin(), taken.end(), [&](const Rect& r) { return overlaps(box, r); })) continue;
    env::ElementState offer;
    offer.element = env::ScreenElement{"distractor:offer", "Limited offer: upgrade to Premium", env::ElementKind::Button,
                                       box, true, std::string(env::kPopupAppId), {}, std::nullopt};
    offer.on_click = {env::Effect{env::EffectKind::Dismiss, {}}};
    env::DesktopState next = state;
    next.popups.push_back(env::Popup{kName, {offer}});
    return next;
  }
  return state;
}

std::vector<std::string> validate_suite(const env::Suite& suite) {
  std::vector<std::string> problems;
  const auto& registry = env::EvaluatorRegistry::builtin();
  std::function<void(const env::TaskSpec&, const json&)> check_nested = [&](const env::TaskSpec& t, const json& checks) {
    for (const auto& c : checks) {
      const std::string name = c.value("name", "");
      if (name == "all_of")
        check_nested(t, c.value("params", json::object()).value("checks", json::array()));
      else if (!registry.has(name))
        problems.push_back(t.id + ": unknown evaluator \"" + name + "\"");
    }
  };
  for (const auto& t : suite.tasks) {
    if (t.feasible || !t.evaluator.name.empty()) {
      if (t.evaluator.name == "all_of")
        check_nested(t, t.evaluator.params.value("checks", json::array()));
      else if (!registry.has(t.evaluator.name))
        problems.push_back(t.id + ": unknown evaluator \"" + t.evaluator.name + "\"");
    }
    if (t.script.empty()) problems.push_back(t.id + ": no scripted rules");
    try {
      parse_scripted_rules(t.script);
    } catch (const Error& e) {
      problems.push_back(t.id + ": " + e.message());
    }
    if (t.feasible) {
      // Evaluators must at least run against the initial state.
      try {
        registry.check(t.evaluator, t.initial_state);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnknownEvaluator) problems.push_back(t.id + ": " + e.message());
      }
    }
  }
  return problems;
}

SuiteResult run_suite(const RunConfig& config) { return run_suite(config, env::load_suite(config.suite_path)); }

SuiteResult run_suite(const RunConfig& config, const env::Suite& suite) {
  config.validate();
  // Manager and worker share one instance when their specs agree, so scripted ordinals stay
  // per (context, role) in a single counter table.
  auto manager = make_backend(config.manager_backend, suite);
  auto worker = config.worker_backend == config.manager_backend ? manager : make_backend(config.worker_backend, suite);
  std::shared_ptr<ModelBackend> grounder_backend;
  auto grounder = make_grounder(config.grounder, suite, grounder_backend);
  TagOverrides overrides;
  if (config.tag_overrides) overrides = load_tag_overrides(*config.tag_overrides);

  // Routes manager calls and worker calls to their respective backends.
  struct SplitBackend : ModelBackend {
    ModelBackend& manager;
    ModelBackend& worker;
    SplitBackend(ModelBackend& m, ModelBackend& w) : manager(m), worker(w) {}
    std::string complete(const ModelRequest& r) override {
      return (r.role == ModelRole::Manager ? manager : worker).complete(r);
    }
    std::string describe() const override { return manager.describe() + "+" + worker.describe(); }
  } backend(*manager, *worker);

  struct Job {
    int budget;
    std::size_t task;
  };
  std::vector<Job> jobs;
  const auto order = task_order(suite, config.seed, config.shuffle);
  for (int budget : config.budgets)
    for (std::size_t idx : order) jobs.push_back({budget, idx});

  std::ofstream steps_log;
  std::ofstream episodes_log;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    steps_log.open(config.out_dir / "steps.jsonl", std::ios::binary | std::ios::trunc);
    episodes_log.open(config.out_dir / "episodes.jsonl", std::ios::binary | std::ios::trunc);
    if (!steps_log || !episodes_log) bad_config("cannot write logs in " + config.out_dir.string());
  }

  SuiteResult result;
  result.episodes.resize(jobs.size());
  std::vector<bool> ready(jobs.size(), false);
  std::size_t next_commit = 0;
  std::mutex commit_mutex;

  auto commit = [&](std::size_t index, EpisodeRecord record) {
    std::lock_guard lock(commit_mutex);
    result.episodes[index] = std::move(record);
    ready[index] = true;
    while (next_commit < jobs.size() && ready[next_commit]) {
      const auto& r = result.episodes[next_commit];
      if (steps_log.is_open()) {
        for (const auto& s : r.steps) {
          json line = to_json(s);
          line["schema"] = kStepSchema;
          line["task_id"] = r.task_id;
          line["budget"] = r.budget;
          line["mode"] = std::string(planning::to_string(r.mode));
          line["mog"] = r.mog_enabled;
          steps_log << line.dump() << "\n";
        }
        episodes_log << to_json(r).dump() << "\n";
      }
      ++next_commit;
    }
  };

  auto run_job = [&](std::size_t index) {
    const Job& job = jobs[index];
    const env::TaskSpec& task = suite.tasks[job.task];
    planning::EpisodeOptions options;
    options.mode = config.mode;
    options.budget = job.budget;
    options.mog_enabled = config.mog_enabled;
    options.context_id = task.id + "@" + std::to_string(job.budget);
    options.visual = grounder.get();
    options.limits.digest_chars = config.digest_chars;
    EpisodeRecord record;
    try {
      const env::DesktopState initial =
          config.distractors ? with_distractor(task.initial_state, task.id, config.seed) : task.initial_state;
      record = planning::run_episode(task, initial, options, backend);
    } catch (const std::exception& e) {
      record = EpisodeRecord{};
      record.task_id = task.id;
      record.category = task.category;
      record.mode = config.mode;
      record.budget = job.budget;
      record.mog_enabled = config.mog_enabled;
      record.termination = planning::Termination::Aborted;
      record.planning_error = planning::StepError{ErrorKind::InvalidConfig, e.what()};
    }
    record.failure_tag = assign_failure_tag(record, task.feasible);
    if (record.reward < 1.0) {
      auto it = overrides.find(options.context_id);
      if (it == overrides.end()) it = overrides.find(task.id);
      if (it != overrides.end()) record.failure_tag = it->second;
    }
    commit(index, std::move(record));
  };

  const int workers = std::min<int>(config.parallelism, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(i);
      });
    for (auto& t : pool) t.join();
  }

  result.report = build_report(result.episodes, suite.name);
  if (!config.out_dir.empty()) {
    steps_log.close();
    episodes_log.close();
    write_text(config.out_dir / "report.json", to_json(result.report).dump(2) + "\n");
    write_text(config.out_dir / "report.txt", render_text(result.report));
    json cj = config.to_json();
    cj["suite_name"] = suite.name;
    write_text(config.out_dir / "config.json", cj.dump(2) + "\n");
  }
  return result;
}

SuiteReport report_from_logs(const std::filesystem::path& log_dir) {
  const auto episodes = read_episodes(log_dir / "episodes.jsonl");
  std::string suite;
  std::ifstream cfg(log_dir / "config.json");
  if (cfg) {
    try {
      const auto c = json::parse(cfg);
      suite = c.value("suite_name", "");
    } catch (const json::exception&) {
    }
  }
  return build_report(episodes, suite);
}

}  // namespace mogplan::harness
