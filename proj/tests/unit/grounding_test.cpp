#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "corpora.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "mogplan/core/error.hpp"
#include "mogplan/env/observation.hpp"
#include "mogplan/env/transition.hpp"
#include "mogplan/grounding/grounding.hpp"
#include "oracles.hpp"

using namespace mogplan;
using testkit::SpanOracle;
using testkit::document_observation;

namespace {

env::Observation buttons(const std::vector<std::string>& labels) {
  env::Observation obs;
  int y = 20;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    obs.elements.push_back(env::ScreenElement{"e" + std::to_string(i), labels[i], env::ElementKind::Button,
                                              env::Rect{20, y, 200, 30}});
    y += 40;
  }
  return obs;
}

SpanOracle::Status status_of(const env::Observation& obs, const std::string& p1, const std::string& p2,
                             SpanCoordinates* out) {
  try {
    *out = grounding::ground_textual(obs, p1, p2);
    return SpanOracle::Status::Found;
  } catch (const PhraseNotFound& e) {
    return e.which() == PhraseEnd::Start ? SpanOracle::Status::StartMissing : SpanOracle::Status::EndMissing;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrderViolation);
    return SpanOracle::Status::OrderViolation;
  }
}

}  // namespace

TEST(Routing, TableMatchesTheExpectedAssignment) {
  const std::map<ActionKind, Expert> expected = {
      {ActionKind::Click, Expert::Visual},
      {ActionKind::Type, Expert::Visual},
      {ActionKind::Scroll, Expert::Visual},
      {ActionKind::DragAndDrop, Expert::Visual},
      {ActionKind::HighlightTextSpan, Expert::Textual},
      {ActionKind::SetCellValues, Expert::Structural},
      {ActionKind::Hotkey, Expert::None},
      {ActionKind::HoldAndPress, Expert::None},
      {ActionKind::SaveToKnowledge, Expert::None},
      {ActionKind::SwitchApplications, Expert::None},
      {ActionKind::Wait, Expert::None},
      {ActionKind::Done, Expert::None},
      {ActionKind::Fail, Expert::None},
  };
  ASSERT_EQ(expected.size(), kAllActionKinds.size());
  testkit::Rng rng(1);
  for (ActionKind kind : kAllActionKinds) {
    EXPECT_EQ(grounding::route_kind(kind), expected.at(kind)) << action_name(kind);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(grounding::route(testkit::random_action(rng, kind)).expert, expected.at(kind));
  }
}

TEST(Routing, ExamplesFromTheActionSpace) {
  EXPECT_EQ(grounding::route(actions::HighlightTextSpan{"I think", "for me?"}).expert, Expert::Textual);
  EXPECT_EQ(grounding::route(actions::SetCellValues{{{"A1", "Profit"}}, "Calc", "Sheet1"}).expert, Expert::Structural);
  EXPECT_EQ(grounding::route(actions::Done{}).expert, Expert::None);
  EXPECT_FALSE(grounding::route(actions::Done{}).rationale.empty());
}

TEST(Routing, ShippedTableEqualsTheBuiltInTable) {
  std::ifstream in(testkit::source_dir() / "assets" / "routing_table.json");
  ASSERT_TRUE(in.good());
  const auto shipped = nlohmann::json::parse(in);
  EXPECT_EQ(shipped, grounding::routing_table_json());
  ASSERT_EQ(shipped["routes"].size(), 13u);
  for (const auto& row : shipped["routes"]) {
    const auto kind = action_kind_from_name(row["action"].get<std::string>());
    ASSERT_TRUE(kind.has_value());
    EXPECT_EQ(row["expert"], std::string(to_string(grounding::route_kind(*kind))));
  }
}

TEST(TextualGrounding, SpanCoversFromStartPhraseToEndPhrase) {
  const auto obs = document_observation("The quick brown fox jumps");
  const auto span = grounding::ground_textual(obs, "quick", "fox");
  EXPECT_EQ(span.start, obs.char_grid[4].box.top_left());
  EXPECT_EQ(span.end, obs.char_grid[18].box.bottom_right());
}

TEST(TextualGrounding, IdenticalPhrasesCoverOneOccurrence) {
  const auto obs = document_observation("The quick brown fox jumps");
  const auto span = grounding::ground_textual(obs, "The", "The");
  EXPECT_EQ(span.start, obs.char_grid[0].box.top_left());
  EXPECT_EQ(span.end, obs.char_grid[2].box.bottom_right());
}

TEST(TextualGrounding, MissingPhrasesNameTheirEnd) {
  const auto obs = document_observation("The quick brown fox jumps");
  try {
    grounding::ground_textual(obs, "zebra", "fox");
    FAIL();
  } catch (const PhraseNotFound& e) {
    EXPECT_EQ(e.which(), PhraseEnd::Start);
    EXPECT_EQ(e.kind(), ErrorKind::PhraseNotFound);
  }
  try {
    grounding::ground_textual(obs, "quick", "zebra");
    FAIL();
  } catch (const PhraseNotFound& e) {
    EXPECT_EQ(e.which(), PhraseEnd::End);
  }
}

TEST(TextualGrounding, EndBeforeStartIsAnOrderViolation) {
  const auto obs = document_observation("The quick brown fox jumps");
  try {
    grounding::ground_textual(obs, "fox", "quick");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrderViolation);
  }
}

TEST(TextualGrounding, MatchingIsCaseSensitiveAndWholeWord) {
  const auto obs = document_observation("the The theme");
  const auto span = grounding::ground_textual(obs, "The", "The");
  EXPECT_EQ(span.start, obs.char_grid[4].box.top_left());
  EXPECT_THROW(grounding::ground_textual(obs, "them", "them"), PhraseNotFound);
}

TEST(TextualGrounding, PhrasesSpanLineBreaks) {
  const auto obs = document_observation("alpha beta\ngamma delta");
  const auto span = grounding::ground_textual(obs, "beta gamma", "delta");
  EXPECT_EQ(span.start, obs.char_grid[6].box.top_left());
  EXPECT_EQ(span.end, obs.char_grid.back().box.bottom_right());
}

TEST(TextualGrounding, AgreesWithBruteForceScanner) {
  testkit::Rng rng(29);
  int found = 0;
  for (int round = 0; round < 400; ++round) {
    const auto c = testkit::random_span_case(rng);
    const auto obs = document_observation(c.text, c.width);
    const auto expected = testkit::brute_force_span(obs.char_grid, c.p1, c.p2);
    SpanCoordinates actual;
    const auto status = status_of(obs, c.p1, c.p2, &actual);
    ASSERT_EQ(status, expected.status) << c.text << "\np1=" << c.p1 << " p2=" << c.p2;
    if (status == SpanOracle::Status::Found) {
      ++found;
      ASSERT_EQ(actual.start, expected.start) << c.text << "\np1=" << c.p1 << " p2=" << c.p2;
      ASSERT_EQ(actual.end, expected.end) << c.text << "\np1=" << c.p1 << " p2=" << c.p2;
    }
  }
  EXPECT_GT(found, 200);
}

TEST(StructuralGrounding, DecodesKeysInOrder) {
  const auto s = testkit::task_from_yaml(testkit::kSheetTask).initial_state;
  const auto writes = grounding::ground_structural(s, "Sheets", "Sales", {{"A1", "Profit"}, {"A2", "=B2-C2"}});
  ASSERT_EQ(writes.size(), 2u);
  EXPECT_EQ(writes[0], (CellWrite{{std::string("Sales"), 0, 0}, "Profit"}));
  EXPECT_EQ(writes[1], (CellWrite{{std::string("Sales"), 0, 1}, "=B2-C2"}));
  const auto prefixed = grounding::ground_structural(s, "sheets", "Sales", {{"Notes!AA10", "x"}});
  EXPECT_EQ(prefixed[0].address, (grounding::CellAddress{std::string("Notes"), 26, 9}));
}

TEST(StructuralGrounding, MalformedKeyRejectsTheWholeBatch) {
  const auto s = testkit::task_from_yaml(testkit::kSheetTask).initial_state;
  try {
    grounding::ground_structural(s, "Sheets", "Sales", {{"A1", "ok"}, {"1A", "bad"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadAddress);
  }
  try {
    grounding::ground_structural(s, "Sheets", "Nope", {{"A1", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownSheet);
  }
  try {
    grounding::ground_structural(s, "Calc", "Sales", {{"A1", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownSheet);
  }
}

TEST(StructuralGrounding, FailedBatchLeavesCellsUntouched) {
  testkit::Rng rng(31);
  const auto s = testkit::task_from_yaml(testkit::kSheetTask).initial_state;
  const auto obs = env::render(s);
  const grounding::TokenOverlapGrounder mock;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<std::string, std::string>> batch;
    for (int k = 0; k < 4; ++k) batch.emplace_back("B" + std::to_string(k + 1), std::to_string(i));
    batch.insert(batch.begin() + testkit::uniform(rng, 0, 4), {testkit::coin(rng) ? "b2" : "Z0", "bad"});
    const Action action = actions::SetCellValues{batch, "Sheets", "Sales"};
    env::DesktopState after = s;
    try {
      after = env::apply(s, grounding::ground(action, obs, s, {&mock, true, "t"}));
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BadAddress);
    }
    EXPECT_EQ(after, s);
  }
}

TEST(VisualGrounding, ExactLabelWins) {
  const auto obs = buttons({"Save", "Save As", "Open"});
  const grounding::TokenOverlapGrounder mock;
  EXPECT_EQ(mock.locate(obs, "Save As", "t"), obs.elements[1].bbox.center());
}

TEST(VisualGrounding, BestOverlapWins) {
  const auto obs = buttons({"Save As", "Open"});
  const grounding::TokenOverlapGrounder mock;
  EXPECT_EQ(mock.locate(obs, "the save button", "t"), obs.elements[0].bbox.center());
}

TEST(VisualGrounding, BelowThresholdIsNoMatch) {
  const auto obs = buttons({"Wi-Fi", "Bluetooth", "Display brightness", "Night light"});
  const grounding::TokenOverlapGrounder mock;
  try {
    mock.locate(obs, "quantum flux capacitor", "t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoMatch);
  }
}

TEST(VisualGrounding, AgreesWithOverlapArgmax) {
  testkit::Rng rng(37);
  const std::vector<std::string> vocab = {"save", "Save", "open", "file", "as", "dark", "mode", "the", "button",
                                          "Display", "name", "field", "é", "Q3", "", "-"};
  auto phrase = [&](int max_words) {
    std::string out;
    const int n = testkit::uniform(rng, 0, max_words);
    for (int i = 0; i < n; ++i) out += (i ? " " : "") + vocab[testkit::uniform(rng, 0, static_cast<int>(vocab.size()) - 1)];
    return out;
  };
  for (int round = 0; round < 3000; ++round) {
    std::vector<std::string> labels;
    const int n = testkit::uniform(rng, 1, 6);
    for (int i = 0; i < n; ++i) labels.push_back(phrase(3));
    const auto obs = buttons(labels);
    std::string description = phrase(4);
    if (description.empty()) description = "x";
    const double threshold = testkit::coin(rng) ? 0.5 : testkit::uniform(rng, 0, 4) / 4.0;
    const grounding::TokenOverlapGrounder mock(threshold);
    const auto expected = testkit::overlap_argmax(obs, description, threshold);
    std::optional<std::size_t> actual;
    try {
      actual = mock.select(obs, description);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::NoMatch);
    }
    ASSERT_EQ(actual, expected) << description;
  }
}

TEST(VisualGrounding, ChoiceIgnoresBoxScale) {
  testkit::Rng rng(41);
  const grounding::TokenOverlapGrounder mock;
  const auto base = buttons({"Save file", "Save as", "Open file", "Close"});
  for (const char* description : {"save the file", "open", "save as copy", "close window"}) {
    const std::size_t choice = mock.select(base, description);
    for (int scale = 2; scale <= 4; ++scale) {
      auto scaled = base;
      for (auto& e : scaled.elements) e.bbox = {e.bbox.x * scale, e.bbox.y * scale, e.bbox.width * scale, e.bbox.height * scale};
      EXPECT_EQ(mock.select(scaled, description), choice);
    }
  }
}

TEST(VisualGrounding, BackendRepliesAreParsedAsPoints) {
  EXPECT_EQ(grounding::parse_point_reply("thinking (1, 2) then (640, 360)", {}), (env::Point{640, 360}));
  EXPECT_THROW(grounding::parse_point_reply("no point here", {}), Error);
  EXPECT_THROW(grounding::parse_point_reply("(1920, 5)", {}), Error);
}

TEST(Grounding, EveryExpertOutputLandsOnSomethingInTheState) {
  testkit::Rng rng(43);
  const grounding::TokenOverlapGrounder mock(0.0);
  for (const char* yaml : {testkit::kEditorTask, testkit::kBoardTask}) {
    const auto s = testkit::task_from_yaml(yaml).initial_state;
    const auto obs = env::render(s);
    for (const auto& e : obs.elements) {
      const auto g = grounding::ground(actions::Click{e.label}, obs, s, {&mock, true, "t"});
      ASSERT_EQ(g.points.size(), 1u);
      EXPECT_TRUE(env::in_screen(g.points[0], obs.screen_size));
      EXPECT_NE(env::element_at(obs, g.points[0]), nullptr);
    }
  }
  const auto s = testkit::task_from_yaml(testkit::kEditorTask).initial_state;
  const auto obs = env::render(s);
  const auto g = grounding::ground(actions::HighlightTextSpan{"lazy", "end."}, obs, s, {&mock, true, "t"});
  ASSERT_TRUE(g.span.has_value());
  int hits = 0;
  for (const auto& c : obs.char_grid) hits += c.box.contains(g.span->start) + c.box.contains(g.span->end);
  EXPECT_EQ(hits, 2);
}

TEST(Grounding, DisabledMixtureRewritesToVisual) {
  testkit::Rng rng(47);
  const grounding::TokenOverlapGrounder mock(0.0);
  const auto s = testkit::task_from_yaml(testkit::kEditorTask).initial_state;
  const auto obs = env::render(s);
  for (int i = 0; i < 300; ++i) {
    const Action action = testkit::random_action(rng);
    try {
      const auto g = grounding::ground(action, obs, s, {&mock, false, "t"});
      EXPECT_NE(g.expert, Expert::Textual);
      EXPECT_NE(g.expert, Expert::Structural);
      EXPECT_TRUE(g.cell_writes.empty());
    } catch (const Error& e) {
      EXPECT_TRUE(is_grounding_error(e.kind())) << e.what();
    }
  }
  const auto g = grounding::ground(actions::HighlightTextSpan{"quick", "fox"}, obs, s, {&mock, false, "t"});
  EXPECT_EQ(g.expert, Expert::Visual);
  EXPECT_TRUE(g.span.has_value());
}
