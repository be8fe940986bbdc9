#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mogplan/env/desktop.hpp"

namespace mogplan::env {

/// A character visible on screen: the screenshot proxy that OCR-style grounding reads.
struct CharCell {
  char32_t ch = 0;
  Rect box;

  bool operator==(const CharCell&) const = default;
};

/// What the agent sees at one step. Only the focused application and popups are exposed.
struct Observation {
  // Bottom to top: document surface, application elements in definition order, sheet tabs,
  // then popups.
  std::vector<ScreenElement> elements;
  // Document characters in reading order, followed by spreadsheet characters row by row.
  std::vector<CharCell> char_grid;
  int step_index = 0;
  Size screen_size;
  std::string focused_app;
  std::string focused_app_name;

  bool operator==(const Observation&) const = default;
};

/// Deterministic; total on states that pass DesktopState::validate().
Observation render(const DesktopState& state);

// Topmost visible element containing p.
const ScreenElement* element_at(const Observation& obs, Point p);

// Characters sorted by (y, x) and concatenated. For a document-only screen this reproduces the
// document string exactly.
std::string reading_order_text(const std::vector<CharCell>& grid);

// Line-oriented extraction: one output line per character row, '\t' wherever two neighbouring
// boxes are not adjacent (spreadsheet cell boundaries).
std::string layout_text(const std::vector<CharCell>& grid);

/// Text rendering of an observation for model prompts: metadata, elements in reading order,
/// then extracted text. Truncated to `limit` characters.
std::string observation_digest(const Observation& obs, std::size_t limit = 4000);

std::string sheet_tab_id(const std::string& app_id, const std::string& sheet);

}  // namespace mogplan::env
