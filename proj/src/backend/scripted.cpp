#include "mogplan/core/error.hpp"
#include "mogplan/backend/backend.hpp"

namespace mogplan {

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::Manager: return "manager";
    case ModelRole::Worker: return "worker";
    case ModelRole::VisualGrounder: return "visual_grounder";
  }
  return "worker";
}

std::optional<ModelRole> model_role_from_string(std::string_view name) {
  for (auto role : {ModelRole::Manager, ModelRole::Worker, ModelRole::VisualGrounder})
    if (to_string(role) == name) return role;
  return std::nullopt;
}

std::vector<ScriptedRule> parse_scripted_rules(const nlohmann::json& rules) {
  auto bad = [](std::size_t i, const std::string& why) {
    throw Error(ErrorKind::InvalidConfig, "scripted rule " + std::to_string(i + 1) + ": " + why);
  };
  if (!rules.is_array()) throw Error(ErrorKind::InvalidConfig, "scripted rules must be a list");
  std::vector<ScriptedRule> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    if (!r.is_object()) bad(i, "expected a mapping");
    for (const auto& [key, _] : r.items())
      if (key != "role" && key != "contains" && key != "ordinal" && key != "context" && key != "response")
        bad(i, "unknown field '" + key + "'");
    ScriptedRule rule;
    if (r.contains("role") && !r["role"].is_null()) {
      if (!r["role"].is_string()) bad(i, "role must be text");
      rule.role = model_role_from_string(r["role"].get<std::string>());
      if (!rule.role) bad(i, "unknown role \"" + r["role"].get<std::string>() + "\"");
    }
    if (r.contains("contains") && !r["contains"].is_null()) {
      const auto& c = r["contains"];
      if (c.is_string()) {
        rule.contains.push_back(c.get<std::string>());
      } else if (c.is_array()) {
        for (const auto& s : c) {
          if (!s.is_string()) bad(i, "contains must be text or a list of text");
          rule.contains.push_back(s.get<std::string>());
        }
      } else {
        bad(i, "contains must be text or a list of text");
      }
    }
    if (r.contains("ordinal") && !r["ordinal"].is_null()) {
      if (!r["ordinal"].is_number_integer() || r["ordinal"].get<long long>() < 1)
        bad(i, "ordinal must be a positive integer");
      rule.ordinal = static_cast<int>(r["ordinal"].get<long long>());
    }
    if (r.contains("context") && !r["context"].is_null()) {
      if (!r["context"].is_string()) bad(i, "context must be text");
      rule.context = r["context"].get<std::string>();
    }
    if (!r.contains("response") || !r["response"].is_string()) bad(i, "response must be text");
    rule.response = r["response"].get<std::string>();
    out.push_back(std::move(rule));
  }
  return out;
}

void ScriptedBackend::add_rules(std::vector<ScriptedRule> rules, const std::string& context) {
  std::lock_guard lock(mutex_);
  for (auto& r : rules) {
    if (!context.empty() && !r.context) r.context = context;
    rules_.push_back(std::move(r));
  }
}

std::string ScriptedBackend::complete(const ModelRequest& request) {
  std::lock_guard lock(mutex_);
  const int ordinal = ++calls_[{request.context_id, request.role}];
  const std::string_view ctx = request.context_id;
  const std::string_view ctx_task = ctx.substr(0, ctx.find('@'));
  for (const auto& rule : rules_) {
    if (rule.role && *rule.role != request.role) continue;
    if (rule.ordinal && *rule.ordinal != ordinal) continue;
    if (rule.context && *rule.context != ctx && *rule.context != ctx_task) continue;
    bool all = true;
    for (const auto& needle : rule.contains)
      if (request.prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    if (all) return rule.response;
  }
  throw Error(ErrorKind::NoRule, "no scripted rule for " + std::string(to_string(request.role)) + " call " +
                                     std::to_string(ordinal) + " in context \"" + request.context_id + "\"");
}

}  // namespace mogplan
