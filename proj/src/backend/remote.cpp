#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "mogplan/backend/backend.hpp"
#include "mogplan/core/error.hpp"

namespace mogplan {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& why) { throw Error(ErrorKind::InvalidConfig, "remote backend: " + why); }

}  // namespace

RemoteConfig RemoteConfig::from_json(const json& c) {
  if (!c.is_object()) bad_config("config must be a JSON object");
  RemoteConfig cfg;
  auto text = [&](const char* key, std::string& out, bool required) {
    if (!c.contains(key)) {
      if (required) bad_config(std::string("missing '") + key + "'");
      return;
    }
    if (!c[key].is_string()) bad_config(std::string("'") + key + "' must be a string");
    out = c[key].get<std::string>();
  };
  auto integer = [&](const char* key, int& out, int lo) {
    if (!c.contains(key)) return;
    if (!c[key].is_number_integer() || c[key].get<long long>() < lo)
      bad_config(std::string("'") + key + "' must be an integer >= " + std::to_string(lo));
    out = static_cast<int>(c[key].get<long long>());
  };
  text("base_url", cfg.base_url, true);
  text("model", cfg.model, true);
  text("api_key_env", cfg.api_key_env, false);
  text("path", cfg.path, false);
  text("auth_header", cfg.auth_header, false);
  text("auth_scheme", cfg.auth_scheme, false);
  integer("timeout_seconds", cfg.timeout_seconds, 1);
  integer("max_attempts", cfg.max_attempts, 1);
  integer("backoff_ms", cfg.backoff_ms, 0);
  cfg.max_attempts = std::min(cfg.max_attempts, 3);
  if (c.contains("temperature")) {
    if (!c["temperature"].is_number()) bad_config("'temperature' must be a number");
    cfg.temperature = c["temperature"].get<double>();
  }
  if (c.contains("system_prompts")) {
    if (!c["system_prompts"].is_object()) bad_config("'system_prompts' must be an object");
    for (const auto& [key, value] : c["system_prompts"].items()) {
      auto role = model_role_from_string(key);
      if (!role || !value.is_string()) bad_config("bad system prompt entry '" + key + "'");
      cfg.system_prompts[*role] = value.get<std::string>();
    }
  }
  if (cfg.base_url.rfind("http://", 0) != 0 && cfg.base_url.rfind("https://", 0) != 0)
    bad_config("base_url must start with http:// or https://");
  return cfg;
}

RemoteConfig RemoteConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    bad_config(path + ": " + e.what());
  }
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) bad_config("environment variable " + config_.api_key_env + " is not set");
    api_key_ = key;
  }
}

json RemoteBackend::request_body(const ModelRequest& request) const {
  json messages = json::array();
  auto sys = config_.system_prompts.find(request.role);
  if (sys != config_.system_prompts.end()) messages.push_back({{"role", "system"}, {"content", sys->second}});
  messages.push_back({{"role", "user"}, {"content", request.prompt}});
  return {{"model", config_.model}, {"messages", messages}, {"temperature", config_.temperature}};
}

std::string RemoteBackend::extract_content(const std::string& response_body) {
  try {
    const auto doc = json::parse(response_body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return a list of content parts.
    std::string out;
    for (const auto& part : content)
      if (part.contains("text")) out += part["text"].get<std::string>();
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::TransportError, std::string("malformed chat-completions response: ") + e.what());
  }
}

std::string RemoteBackend::complete(const ModelRequest& request) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!api_key_.empty())
    headers.emplace(config_.auth_header, config_.auth_scheme.empty() ? api_key_ : config_.auth_scheme + " " + api_key_);
  const std::string body = request_body(request).dump();

  ErrorKind last_kind = ErrorKind::TransportError;
  std::string last_message;
  int attempts = 0;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    ++attempts;
    if (attempt > 0 && config_.backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res) {
      last_kind = ErrorKind::TransportError;
      last_message = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return extract_content(res->body);
    if (res->status == 429) {
      last_kind = ErrorKind::RateLimited;
      last_message = "HTTP 429 from " + config_.base_url;
      continue;
    }
    last_kind = ErrorKind::TransportError;
    last_message = "HTTP " + std::to_string(res->status) + " from " + config_.base_url;
    if (res->status < 500) break;
  }
  throw Error(last_kind, last_message + " after " + std::to_string(attempts) + " attempt(s)");
}

}  // namespace mogplan
