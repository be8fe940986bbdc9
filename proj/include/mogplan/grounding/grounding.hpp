#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mogplan/backend/backend.hpp"
#include "mogplan/env/desktop.hpp"
#include "mogplan/env/observation.hpp"
#include "mogplan/grounding/types.hpp"

namespace mogplan::grounding {

/// Gating decision for an action: a pure function of its kind.
GroundingRoute route(const Action& action);
Expert route_kind(ActionKind kind);

/// The routing table in its published form:
/// {"version": 1, "routes": [{"action": "click", "expert": "visual"}, ...]} in canonical order.
nlohmann::json routing_table_json();

/// Normalized tokens: lowercase ASCII, split on anything that is not a letter or digit.
/// Bytes >= 0x80 count as letters so UTF-8 words stay whole.
std::vector<std::string> normalize_tokens(std::string_view text);

/// Fraction of the label's distinct tokens that also occur in the description.
double overlap_score(std::string_view description, std::string_view label);

class VisualGrounder {
 public:
  virtual ~VisualGrounder() = default;
  /// Throws Error(NoMatch) when the description cannot be resolved to a point on screen.
  virtual PointCoordinate locate(const env::Observation& obs, const std::string& description,
                                 const std::string& context_id) const = 0;
};

/// Deterministic reference grounder. An element whose label equals the description verbatim
/// wins outright; otherwise the highest overlap_score wins, ties going to the larger overlap
/// count and then to the earliest element in observation order. Returns the element center.
class TokenOverlapGrounder : public VisualGrounder {
 public:
  explicit TokenOverlapGrounder(double threshold = 0.5) : threshold_(threshold) {}

  PointCoordinate locate(const env::Observation& obs, const std::string& description,
                         const std::string& context_id) const override;
  // Index into obs.elements of the chosen element.
  std::size_t select(const env::Observation& obs, const std::string& description) const;

  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

/// Delegates to a model backend with the VisualGrounder role. The reply must contain a point
/// written as "(x, y)"; the last such pair is used.
class BackendVisualGrounder : public VisualGrounder {
 public:
  explicit BackendVisualGrounder(ModelBackend& backend) : backend_(backend) {}

  PointCoordinate locate(const env::Observation& obs, const std::string& description,
                         const std::string& context_id) const override;

 private:
  ModelBackend& backend_;
};

/// Throws Error(NoMatch) if no "(x, y)" pair is present or the point is off screen.
PointCoordinate parse_point_reply(const std::string& reply, env::Size screen);

/// Exact, case-sensitive match of whitespace-separated word sequences against the words
/// formed by the observation's character grid (reading order). p1 resolves to its first
/// occurrence; p2 to its first occurrence that neither starts nor ends before p1.
/// Throws PhraseNotFound, or Error(OrderViolation) when p2 only occurs before p1.
SpanCoordinates ground_textual(const env::Observation& obs, const std::string& p1, const std::string& p2);

/// Validates a batch of cell writes against the named application and sheet. Keys may carry
/// their own "Sheet!" prefix. The batch is all-or-nothing: any malformed key throws
/// Error(BadAddress) and any missing sheet Error(UnknownSheet) before anything is returned.
std::vector<CellWrite> ground_structural(const env::DesktopState& state, const std::string& app,
                                         const std::string& sheet,
                                         const std::vector<std::pair<std::string, std::string>>& cell_values);

struct GroundingOptions {
  const VisualGrounder* visual = nullptr;
  // When false, textual and structural actions are grounded visually from synthesized
  // descriptions.
  bool mog_enabled = true;
  std::string context_id;
};

// Description handed to the visual expert for a phrase or cell when the mixture is disabled.
std::string synthesized_phrase_description(const std::string& phrase);
std::string synthesized_cell_description(const std::string& key, const std::string& sheet);

/// Routes and grounds one action. The `expert` field of the result records the expert that
/// actually ran (Visual for rewritten actions). Grounding errors propagate.
GroundedAction ground(const Action& action, const env::Observation& obs, const env::DesktopState& state,
                      const GroundingOptions& options);

}  // namespace mogplan::grounding
