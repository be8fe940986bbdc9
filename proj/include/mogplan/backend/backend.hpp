#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mogplan {

enum class ModelRole { Manager, Worker, VisualGrounder };

std::string_view to_string(ModelRole role);
std::optional<ModelRole> model_role_from_string(std::string_view name);

struct ModelRequest {
  ModelRole role = ModelRole::Worker;
  std::string prompt;
  // Identifies the episode; scripted ordinals are counted per (context_id, role).
  std::string context_id;
};

/// Text-in, text-out access to a learned model. Implementations must tolerate concurrent
/// calls from parallel episodes.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string complete(const ModelRequest& request) = 0;
  virtual std::string describe() const = 0;
};

/// One scripted response. Every present field must match; the first matching rule wins.
struct ScriptedRule {
  std::optional<ModelRole> role;
  // Substrings that must all occur in the prompt.
  std::vector<std::string> contains;
  // 1-based call number for this (context_id, role), counting every call.
  std::optional<int> ordinal;
  // Exact context_id, or the part before '@' (a task id matches every budget of that task).
  std::optional<std::string> context;
  std::string response;
};

/// Parses a JSON rule list: [{"role": "worker", "contains": "..." | [...], "ordinal": 1,
/// "context": "task-id", "response": "..."}]. Throws Error(InvalidConfig).
std::vector<ScriptedRule> parse_scripted_rules(const nlohmann::json& rules);

class ScriptedBackend : public ModelBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<ScriptedRule> rules) : rules_(std::move(rules)) {}

  // Appends rules; a non-empty `context` is applied to rules that carry none.
  void add_rules(std::vector<ScriptedRule> rules, const std::string& context = {});

  /// Throws Error(NoRule) when nothing matches; the call still counts towards ordinals.
  std::string complete(const ModelRequest& request) override;
  std::string describe() const override { return "scripted"; }

  std::size_t rule_count() const { return rules_.size(); }

 private:
  std::vector<ScriptedRule> rules_;
  std::map<std::pair<std::string, ModelRole>, int> calls_;
  std::mutex mutex_;
};

/// Chat-completions client. Config fields (JSON):
///   base_url (required), model (required), api_key_env (name of the variable holding the key),
///   path ("/v1/chat/completions"), auth_header ("Authorization"), auth_scheme ("Bearer"),
///   timeout_seconds (60), max_attempts (3, capped at 3), backoff_ms (500), temperature (0),
///   system_prompts ({"manager": ..., "worker": ..., "visual_grounder": ...}).
struct RemoteConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env;
  std::string path = "/v1/chat/completions";
  std::string auth_header = "Authorization";
  std::string auth_scheme = "Bearer";
  int timeout_seconds = 60;
  int max_attempts = 3;
  int backoff_ms = 500;
  double temperature = 0.0;
  std::map<ModelRole, std::string> system_prompts;

  static RemoteConfig from_json(const nlohmann::json& config);
  static RemoteConfig load(const std::string& path);
};

class RemoteBackend : public ModelBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  /// Retries transport failures, 5xx and 429 with exponential backoff; then throws
  /// Error(RateLimited) or Error(TransportError).
  std::string complete(const ModelRequest& request) override;
  std::string describe() const override { return "remote:" + config_.model; }

  nlohmann::json request_body(const ModelRequest& request) const;
  static std::string extract_content(const std::string& response_body);

 private:
  RemoteConfig config_;
  std::string api_key_;
};

}  // namespace mogplan
