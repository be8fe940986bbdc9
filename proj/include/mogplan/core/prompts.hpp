#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mogplan {

/// Prompt templates compiled in from assets/prompts/<name>.v<N>.txt. Known names: "manager",
/// "worker", "grounder". Throws Error(InvalidConfig) for unknown names.
std::string_view prompt_template(std::string_view name);
// e.g. "manager.v1"
std::string_view prompt_version(std::string_view name);

/// Replaces every {{key}} with its value. Throws Error(InvalidConfig) if the template uses a
/// placeholder that is not supplied.
std::string render_prompt(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace mogplan
