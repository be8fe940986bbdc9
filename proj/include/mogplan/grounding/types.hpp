#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mogplan/backend/action.hpp"
#include "mogplan/env/geometry.hpp"
#include "mogplan/grounding/a1.hpp"

namespace mogplan {

enum class Expert { Visual, Textual, Structural, None };

std::string_view to_string(Expert expert);
std::optional<Expert> expert_from_string(std::string_view name);

struct GroundingRoute {
  Expert expert = Expert::None;
  std::string rationale;

  bool operator==(const GroundingRoute&) const = default;
};

using PointCoordinate = env::Point;

/// Start is the top-left pixel of the first character, end the bottom-right pixel of the last.
struct SpanCoordinates {
  PointCoordinate start;
  PointCoordinate end;

  bool operator==(const SpanCoordinates&) const = default;
};

struct CellWrite {
  grounding::CellAddress address;  // sheet always filled after grounding
  std::string value;

  bool operator==(const CellWrite&) const = default;
};

/// An action with its targets resolved by one expert.
struct GroundedAction {
  Action action;
  Expert expert = Expert::None;
  // Visual: one point per element description, in argument order.
  std::vector<PointCoordinate> points;
  // Textual, or a visually grounded span when the text expert is disabled.
  std::optional<SpanCoordinates> span;
  // Structural: resolved application id plus the validated write batch.
  std::string app_id;
  std::vector<CellWrite> cell_writes;
  // Cell writes grounded as screen points (text expert disabled); applied one by one.
  std::vector<std::pair<PointCoordinate, std::string>> point_writes;

  bool operator==(const GroundedAction&) const = default;
};

}  // namespace mogplan
