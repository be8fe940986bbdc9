#include "mogplan/core/prompts.hpp"

#include "mogplan/core/error.hpp"
#include "prompt_assets.hpp"

namespace mogplan {

namespace {

const detail::PromptAsset& find_asset(std::string_view name) {
  for (const auto& asset : detail::kPromptAssets)
    if (asset.name == name) return asset;
  throw Error(ErrorKind::InvalidConfig, "no prompt template named \"" + std::string(name) + "\"");
}

}  // namespace

std::string_view prompt_template(std::string_view name) { return find_asset(name).text; }

std::string_view prompt_version(std::string_view name) { return find_asset(name).version; }

std::string render_prompt(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::string_view key = tmpl.substr(open + 2, close - open - 2);
    bool found = false;
    for (const auto& [k, v] : values)
      if (k == key) {
        out += v;
        found = true;
        break;
      }
    if (!found) throw Error(ErrorKind::InvalidConfig, "prompt placeholder {{" + std::string(key) + "}} has no value");
    pos = close + 2;
  }
  return out;
}

}  // namespace mogplan
