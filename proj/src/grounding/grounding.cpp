#include "mogplan/grounding/grounding.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "mogplan/core/error.hpp"
#include "mogplan/core/prompts.hpp"
#include "mogplan/core/utf8.hpp"

namespace mogplan::grounding {

namespace {

using env::CharCell;
using env::Observation;

struct Word {
  std::u32string text;
  std::size_t first = 0;  // index of first char in the grid
  std::size_t last = 0;
};

std::vector<Word> grid_words(const std::vector<CharCell>& grid) {
  std::vector<Word> words;
  bool open = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CharCell& c = grid[i];
    if (utf8::is_space(c.ch)) {
      open = false;
      continue;
    }
    const bool adjacent = open && grid[i - 1].box.y == c.box.y && grid[i - 1].box.right() == c.box.x;
    if (!adjacent) words.push_back(Word{{}, i, i});
    words.back().text.push_back(c.ch);
    words.back().last = i;
    open = true;
  }
  return words;
}

std::vector<std::u32string> phrase_words(const std::string& phrase) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t ch : utf8::decode(phrase)) {
    if (utf8::is_space(ch)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool matches_at(const std::vector<Word>& words, std::size_t i, const std::vector<std::u32string>& phrase) {
  if (i + phrase.size() > words.size()) return false;
  for (std::size_t k = 0; k < phrase.size(); ++k)
    if (words[i + k].text != phrase[k]) return false;
  return true;
}

}  // namespace


Expert route_kind(ActionKind kind) {
  switch (kind) {
    case ActionKind::HighlightTextSpan: return Expert::Textual;
    case ActionKind::SetCellValues: return Expert::Structural;
    case ActionKind::Click:
    case ActionKind::Type:
    case ActionKind::Scroll:
    case ActionKind::DragAndDrop:
      return Expert::Visual;
    case ActionKind::Hotkey:
    case ActionKind::HoldAndPress:
    case ActionKind::SaveToKnowledge:
    case ActionKind::SwitchApplications:
    case ActionKind::Wait:
    case ActionKind::Done:
    case ActionKind::Fail:
      return Expert::None;
  }
  return Expert::None;
}

GroundingRoute route(const Action& action) {
  const Expert expert = route_kind(action.kind());
  std::string why;
  switch (expert) {
    case Expert::Visual: why = "targets an element by description; resolved to a screen point"; break;
    case Expert::Textual: why = "targets a text span by its boundary phrases; resolved over character boxes"; break;
    case Expert::Structural: why = "targets cells by address; written programmatically"; break;
    case Expert::None: why = "carries no screen target"; break;
  }
  return GroundingRoute{expert, std::string(action_name(action.kind())) + " " + why};
}

nlohmann::json routing_table_json() {
  nlohmann::json routes = nlohmann::json::array();
  for (ActionKind kind : kAllActionKinds)
    routes.push_back({{"action", std::string(action_name(kind))}, {"expert", std::string(to_string(route_kind(kind)))}});
  return {{"version", 1}, {"routes", routes}};
}

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    const bool word = (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
    if (word) {
      cur.push_back(u >= 'A' && u <= 'Z' ? static_cast<char>(u - 'A' + 'a') : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::pair<double, std::size_t> score_and_overlap(const std::set<std::string>& desc, std::string_view label) {
  const auto tokens = normalize_tokens(label);
  const std::set<std::string> label_set(tokens.begin(), tokens.end());
  if (label_set.empty()) return {0.0, 0};
  std::size_t hit = 0;
  for (const auto& t : label_set) hit += desc.count(t);
  return {static_cast<double>(hit) / static_cast<double>(label_set.size()), hit};
}

}  // namespace

double overlap_score(std::string_view description, std::string_view label) {
  const auto d = normalize_tokens(description);
  return score_and_overlap({d.begin(), d.end()}, label).first;
}

std::size_t TokenOverlapGrounder::select(const Observation& obs, const std::string& description) const {
  if (description.empty()) throw Error(ErrorKind::NoMatch, "empty element description");
  for (std::size_t i = 0; i < obs.elements.size(); ++i)
    if (obs.elements[i].label == description) return i;
  const auto d = normalize_tokens(description);
  const std::set<std::string> desc(d.begin(), d.end());
  std::size_t best = obs.elements.size();
  std::pair<double, std::size_t> best_score{-1.0, 0};
  for (std::size_t i = 0; i < obs.elements.size(); ++i) {
    const auto s = score_and_overlap(desc, obs.elements[i].label);
    if (s.first > best_score.first || (s.first == best_score.first && s.second > best_score.second)) {
      best = i;
      best_score = s;
    }
  }
  if (best == obs.elements.size() || best_score.first < threshold_)
    throw Error(ErrorKind::NoMatch, "no element matches \"" + description + "\"");
  return best;
}

PointCoordinate TokenOverlapGrounder::locate(const Observation& obs, const std::string& description,
                                             const std::string&) const {
  return obs.elements[select(obs, description)].bbox.center();
}

PointCoordinate parse_point_reply(const std::string& reply, env::Size screen) {
  static const std::regex point_re(R"(\(\s*(-?\d{1,9})\s*,\s*(-?\d{1,9})\s*\))");
  std::optional<PointCoordinate> last;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), point_re); it != std::sregex_iterator(); ++it)
    last = PointCoordinate{std::stoi((*it)[1]), std::stoi((*it)[2])};
  if (!last) throw Error(ErrorKind::NoMatch, "grounding reply contains no (x, y) point");
  if (!env::in_screen(*last, screen))
    throw Error(ErrorKind::NoMatch, "grounding reply point (" + std::to_string(last->x) + ", " +
                                        std::to_string(last->y) + ") is off screen");
  return *last;
}

PointCoordinate BackendVisualGrounder::locate(const Observation& obs, const std::string& description,
                                              const std::string& context_id) const {
  if (description.empty()) throw Error(ErrorKind::NoMatch, "empty element description");
  const std::string prompt = render_prompt(prompt_template("grounder"),
                                           {{"description", description},
                                            {"screen", std::to_string(obs.screen_size.width) + "x" +
                                                           std::to_string(obs.screen_size.height)},
                                            {"observation", env::observation_digest(obs)}});
  return parse_point_reply(backend_.complete({ModelRole::VisualGrounder, prompt, context_id}), obs.screen_size);
}

SpanCoordinates ground_textual(const Observation& obs, const std::string& p1, const std::string& p2) {
  const auto start_words = phrase_words(p1);
  const auto end_words = phrase_words(p2);
  if (start_words.empty()) throw PhraseNotFound(PhraseEnd::Start, p1);
  if (end_words.empty()) throw PhraseNotFound(PhraseEnd::End, p2);
  const auto words = grid_words(obs.char_grid);

  std::size_t s = words.size();
  for (std::size_t i = 0; i < words.size(); ++i)
    if (matches_at(words, i, start_words)) {
      s = i;
      break;
    }
  if (s == words.size()) throw PhraseNotFound(PhraseEnd::Start, p1);
  const std::size_t s_end = s + start_words.size() - 1;

  bool seen_before = false;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (!matches_at(words, k, end_words)) continue;
    if (k >= s && k + end_words.size() - 1 >= s_end) {
      const auto& first = obs.char_grid[words[s].first].box;
      const auto& last = obs.char_grid[words[k + end_words.size() - 1].last].box;
      return SpanCoordinates{first.top_left(), last.bottom_right()};
    }
    seen_before = true;
  }
  if (seen_before)
    throw Error(ErrorKind::OrderViolation, "end phrase \"" + p2 + "\" only occurs before start phrase \"" + p1 + "\"");
  throw PhraseNotFound(PhraseEnd::End, p2);
}

std::vector<CellWrite> ground_structural(const env::DesktopState& state, const std::string& app,
                                         const std::string& sheet,
                                         const std::vector<std::pair<std::string, std::string>>& cell_values) {
  std::vector<CellWrite> writes;
  writes.reserve(cell_values.size());
  for (const auto& [key, value] : cell_values) {
    CellAddress addr = parse_a1(key);
    if (!addr.sheet) addr.sheet = sheet;
    writes.push_back(CellWrite{std::move(addr), value});
  }
  const env::AppState* target = state.find_app(app);
  if (!target || !target->sheet)
    throw Error(ErrorKind::UnknownSheet, "application \"" + app + "\" has no spreadsheet");
  for (const auto& w : writes)
    if (!target->sheet->workbook.has_sheet(*w.address.sheet))
      throw Error(ErrorKind::UnknownSheet, "no sheet \"" + *w.address.sheet + "\" in \"" + app + "\"");
  return writes;
}

std::string synthesized_phrase_description(const std::string& phrase) { return "the text \"" + phrase + "\""; }

std::string synthesized_cell_description(const std::string& key, const std::string& sheet) {
  return "cell " + key + " in " + sheet;
}

GroundedAction ground(const Action& action, const Observation& obs, const env::DesktopState& state,
                      const GroundingOptions& options) {
  GroundedAction g;
  g.action = action;
  g.expert = route_kind(action.kind());
  auto visual = [&](const std::string& description) {
    if (!options.visual) throw Error(ErrorKind::NoMatch, "no visual grounder configured");
    return options.visual->locate(obs, description, options.context_id);
  };

  if (!options.mog_enabled && (g.expert == Expert::Textual || g.expert == Expert::Structural)) {
    if (auto* a = action.get_if<actions::HighlightTextSpan>()) {
      g.span = SpanCoordinates{visual(synthesized_phrase_description(a->starting_phrase)),
                               visual(synthesized_phrase_description(a->ending_phrase))};
    } else if (auto* a = action.get_if<actions::SetCellValues>()) {
      for (const auto& [key, value] : a->cell_values)
        g.point_writes.emplace_back(visual(synthesized_cell_description(key, a->sheet_name)), value);
    }
    g.expert = Expert::Visual;
    return g;
  }

  switch (g.expert) {
    case Expert::Visual:
      for (const auto& d : action.element_descriptions()) g.points.push_back(visual(d));
      break;
    case Expert::Textual: {
      const auto* a = action.get_if<actions::HighlightTextSpan>();
      g.span = ground_textual(obs, a->starting_phrase, a->ending_phrase);
      break;
    }
    case Expert::Structural: {
      const auto* a = action.get_if<actions::SetCellValues>();
      g.cell_writes = ground_structural(state, a->app_name, a->sheet_name, a->cell_values);
      g.app_id = state.find_app(a->app_name)->id;
      break;
    }
    case Expert::None:
      break;
  }
  return g;
}

}  // namespace mogplan::grounding

namespace mogplan {

std::string_view to_string(Expert expert) {
  switch (expert) {
    case Expert::Visual: return "visual";
    case Expert::Textual: return "textual";
    case Expert::Structural: return "structural";
    case Expert::None: return "none";
  }
  return "none";
}

std::optional<Expert> expert_from_string(std::string_view name) {
  for (auto e : {Expert::Visual, Expert::Textual, Expert::Structural, Expert::None})
    if (to_string(e) == name) return e;
  return std::nullopt;
}

}  // namespace mogplan
