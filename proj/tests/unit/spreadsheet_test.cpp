#include <gtest/gtest.h>

#include "generators.hpp"
#include "mogplan/core/error.hpp"
#include "mogplan/env/spreadsheet.hpp"

using namespace mogplan;
using env::Sheet;
using env::SheetLayout;
using env::Spreadsheet;

TEST(Spreadsheet, AbsentCellsReadEmptyAndEmptyWritesDelete) {
  Spreadsheet book;
  book.add_sheet("Sheet1");
  EXPECT_EQ(book.get("Sheet1", 3, 4), "");
  book.set("Sheet1", 0, 0, "Profit");
  EXPECT_EQ(book.get("Sheet1", 0, 0), "Profit");
  EXPECT_EQ(book.sheet("Sheet1").cells.size(), 1u);
  book.set("Sheet1", 0, 0, "");
  EXPECT_TRUE(book.sheet("Sheet1").cells.empty());
}

TEST(Spreadsheet, FormulasAreStoredVerbatim) {
  Spreadsheet book;
  book.add_sheet("S");
  book.set("S", 0, 1, "=B2-C2");
  EXPECT_EQ(book.get("S", 0, 1), "=B2-C2");
  EXPECT_EQ(env::classify_cell("=B2-C2"), env::CellKind::Formula);
  EXPECT_EQ(env::classify_cell("12.5"), env::CellKind::Number);
  EXPECT_EQ(env::classify_cell("North"), env::CellKind::Text);
  EXPECT_EQ(env::classify_cell(""), env::CellKind::Empty);
}

TEST(Spreadsheet, UnknownSheetIsReported) {
  Spreadsheet book;
  try {
    book.get("Missing", 0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownSheet);
  }
}

TEST(Spreadsheet, ResizingNeverChangesValues) {
  testkit::Rng rng(13);
  for (int round = 0; round < 50; ++round) {
    Spreadsheet book;
    book.add_sheet("S");
    for (int i = 0; i < 30; ++i)
      book.set("S", testkit::uniform(rng, 0, 20), testkit::uniform(rng, 0, 40), std::to_string(i));
    const auto before = book.sheet("S").cells;
    for (int i = 0; i < 10; ++i) {
      book.resize_column("S", testkit::uniform(rng, 0, 20), testkit::uniform(rng, 1, 400));
      book.resize_row("S", testkit::uniform(rng, 0, 40), testkit::uniform(rng, 1, 90));
    }
    EXPECT_EQ(book.sheet("S").cells, before);
  }
}

TEST(SheetLayout, CellBoxesFollowColumnWidthsAndRowHeights) {
  Sheet sheet;
  sheet.column_widths[1] = 150;
  sheet.row_heights[0] = 30;
  const SheetLayout layout{env::Rect{0, 0, 1000, 600}};
  const auto grid = env::layout_sheet(sheet, layout);
  ASSERT_GE(grid.columns.size(), 3u);
  EXPECT_EQ(grid.columns[0].second.x, 40);
  EXPECT_EQ(grid.columns[1].second.x, 140);
  EXPECT_EQ(grid.columns[1].second.width, 150);
  EXPECT_EQ(grid.columns[2].second.x, 290);
  EXPECT_EQ(grid.rows[0].second.y, 24);
  EXPECT_EQ(grid.rows[1].second.y, 54);
}

TEST(SheetLayout, EveryVisibleCellIsFoundAtItsCenter) {
  testkit::Rng rng(17);
  for (int round = 0; round < 20; ++round) {
    Sheet sheet;
    for (int i = 0; i < 8; ++i) {
      sheet.column_widths[testkit::uniform(rng, 0, 12)] = testkit::uniform(rng, 20, 300);
      sheet.row_heights[testkit::uniform(rng, 0, 30)] = testkit::uniform(rng, 10, 60);
    }
    SheetLayout layout{env::Rect{40, 80, 1000, 600}};
    layout.row_offset = testkit::uniform(rng, 0, 5);
    layout.column_offset = testkit::uniform(rng, 0, 3);
    for (const auto& cell : env::layout_sheet(sheet, layout).cells) {
      const auto found = env::cell_at(sheet, layout, cell.box.center());
      ASSERT_TRUE(found.has_value());
      EXPECT_EQ(found->column, cell.column);
      EXPECT_EQ(found->row, cell.row);
      EXPECT_TRUE(cell.box.within(env::Size{}));
    }
  }
}

TEST(SheetLayout, HeadersAreNotCells) {
  const Sheet sheet;
  const SheetLayout layout{env::Rect{40, 80, 1000, 600}};
  EXPECT_FALSE(env::cell_at(sheet, layout, {45, 85}).has_value());
  EXPECT_FALSE(env::cell_at(sheet, layout, {2000, 85}).has_value());
}
