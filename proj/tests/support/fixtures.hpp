#pragma once

#include <filesystem>
#include <string>

#include "mogplan/env/task.hpp"

namespace mogplan::testkit {

inline std::filesystem::path source_dir() { return MOGPLAN_SOURCE_DIR; }
inline std::filesystem::path bundled_suite() { return source_dir() / "suites" / "desk" / "suite.yaml"; }

inline env::TaskSpec task_from_yaml(const std::string& yaml) { return env::task_from_json(env::yaml_to_json(yaml)); }

// One app with a toggle button, a text field, a document and a spreadsheet-free layout.
inline const char* kEditorTask = R"(
id: editor
category: text_editing
instruction: Make it bold.
apps:
  - id: writer
    name: Writer
    flags: {ruler: false}
    elements:
      - {id: bold_button, label: Bold, bbox: [40, 40, 60, 28], on_click: [style bold]}
      - {id: ruler_toggle, label: Show ruler, bbox: [110, 40, 120, 28], flag: ruler, on_click: [toggle ruler]}
      - {id: title_field, label: Title, kind: text-field, bbox: [240, 40, 300, 28], value: x}
      - {id: disabled_button, label: Archive, bbox: [560, 40, 90, 28], enabled: false, on_click: [toggle ruler]}
    keybindings:
      ctrl+b: [style bold]
    document:
      bbox: [40, 80, 800, 200]
      text: "The quick brown fox jumps\nover the lazy dog. The end."
  - id: mail
    name: Mail
    elements:
      - {id: subject, label: Subject, kind: text-field, bbox: [40, 40, 300, 28]}
evaluator:
  name: text_has_style
  params: {app: writer, text: "quick brown fox", attr: bold}
)";

inline const char* kSheetTask = R"(
id: sheet
category: spreadsheets
instruction: Fill totals.
apps:
  - id: sheets
    name: Sheets
    spreadsheet:
      bbox: [40, 80, 1000, 600]
      active: Sales
      sheets:
        Sales:
          cells: {A1: Region, B1: Q1, A2: North, B2: "120"}
        Notes: {}
evaluator:
  name: cells_equal
  params: {app: sheets, sheet: Sales, cells: {A1: Profit}}
)";

inline const char* kBoardTask = R"(
id: board
category: workflow
instruction: Move the card.
apps:
  - id: board
    name: Board
    elements:
      - {id: todo_zone, label: To do column, bbox: [40, 40, 300, 400], drop_zone: todo}
      - {id: done_zone, label: Done column, bbox: [400, 40, 300, 400], drop_zone: done}
      - {id: card, label: Write notes card, kind: list-item, bbox: [50, 60, 280, 40], container: todo}
events:
  - {at_step: 2, app: board, effects: ["relabel done_zone \"Finished column\""]}
evaluator:
  name: item_in_container
  params: {element: card, container: done}
)";

}  // namespace mogplan::testkit
