#include <gtest/gtest.h>

#include <fstream>

#include "vigil/entity_filter.hpp"

using namespace vigil;

namespace {

std::vector<Caption> captions_of(const EntityVocabulary& v, std::initializer_list<const char*> texts) {
  std::vector<Caption> out;
  FrameId id = 0;
  for (const char* t : texts) {
    Caption c;
    c.text = t;
    c.frame_id = id++;
    c.entities = v.mentioned(t);
    out.push_back(std::move(c));
  }
  return out;
}

FrequencyTable table(std::vector<std::size_t> counts) { return {std::move(counts), 0}; }

std::set<EntityId> ids(std::initializer_list<EntityId> l) { return l; }

}  // namespace

TEST(Vocabulary, ParsesAliasesCommentsAndBlankLines) {
  auto v = EntityVocabulary::parse("# people\nperson|man|woman\n\n  bag | backpack \nshelf\n");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].name, "person");
  EXPECT_EQ(v.find("Woman"), EntityId{0});
  EXPECT_EQ(v.find("backpack"), EntityId{1});
  EXPECT_FALSE(v.find("car").has_value());
}

TEST(Vocabulary, RejectsDuplicatesAndEmptyAliases) {
  EXPECT_THROW(EntityVocabulary::parse("man\nperson|man\n"), std::invalid_argument);
  EXPECT_THROW(EntityVocabulary::parse("man||boy\n"), std::invalid_argument);
  EXPECT_THROW(EntityVocabulary::parse("!!!\n"), std::invalid_argument);
}

TEST(Vocabulary, BundledVocabularyLoads) {
  std::ifstream in(std::string(VIGIL_SOURCE_DIR) + "/assets/vocab/default.txt");
  ASSERT_TRUE(in);
  auto v = EntityVocabulary::parse(in);
  EXPECT_GE(v.size(), 10u);
  EXPECT_TRUE(v.find("man").has_value());
}

TEST(CountEntities, HandCountedExample) {
  auto v = EntityVocabulary::parse("man\nbag\ncar\n");
  auto caps = captions_of(v, {"a man with a bag", "a man runs"});
  auto f = count_entities(caps, v);
  EXPECT_EQ(f.counts, (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_EQ(f.horizon, 2u);
}

TEST(CountEntities, EmptyInputIsAllZero) {
  auto v = EntityVocabulary::parse("man\nbag\n");
  EXPECT_EQ(count_entities({}, v).counts, (std::vector<std::size_t>{0, 0}));
}

TEST(CountEntities, WholeWordOnly) {
  auto v = EntityVocabulary::parse("man\n");
  auto caps = captions_of(v, {"manual labor", "Batman and a MAN."});
  EXPECT_EQ(count_entities(std::span(caps).first(1), v).counts[0], 0u);
  EXPECT_EQ(count_entities(caps, v).counts[0], 1u);
}

TEST(CountEntities, RepeatedMentionsAndAliasesFold) {
  auto v = EntityVocabulary::parse("person|man|woman\ncar\n");
  auto caps = captions_of(v, {"a man and a woman and a man near a car"});
  EXPECT_EQ(count_entities(caps, v).counts, (std::vector<std::size_t>{3, 1}));
}

TEST(CountEntities, LongestAliasWins) {
  auto v = EntityVocabulary::parse("police car\ncar\npolice|officer\n");
  auto caps = captions_of(v, {"a police car passes a car and a police officer"});
  EXPECT_EQ(count_entities(caps, v).counts, (std::vector<std::size_t>{1, 1, 2}));
}

TEST(Screen, CliffAfterTopEntity) {
  // person 10, bag 4, tree 1: 10 > 2*4 is a cliff before bag.
  auto r = screen_main_entities(table({10, 4, 1}), 3);
  EXPECT_EQ(r.main_entities, ids({0}));
  EXPECT_EQ(r.redundant_entities, ids({1, 2}));
  ASSERT_EQ(r.sorted_counts.size(), 3u);
  EXPECT_EQ(r.sorted_counts[0], (std::pair<EntityId, std::size_t>{0, 10}));
}

TEST(Screen, CliffBeforeTree) {
  auto r = screen_main_entities(table({10, 6, 1}), 3);
  EXPECT_EQ(r.main_entities, ids({0, 1}));
  EXPECT_EQ(r.redundant_entities, ids({2}));
}

TEST(Screen, AllBelowTau) {
  auto r = screen_main_entities(table({3, 2, 0, 1}), 3);
  EXPECT_TRUE(r.main_entities.empty());
  EXPECT_EQ(r.redundant_entities, ids({0, 1, 3}));
}

TEST(Screen, TiesKeepVocabularyOrder) {
  auto r = screen_main_entities(table({2, 5, 5, 0}), 3);
  ASSERT_EQ(r.sorted_counts.size(), 3u);
  EXPECT_EQ(r.sorted_counts[0].first, 1u);
  EXPECT_EQ(r.sorted_counts[1].first, 2u);
  EXPECT_EQ(r.sorted_counts[2].first, 0u);
}

TEST(Screen, LiteralRuleSelectsAfterTheCliff) {
  // sorted 20, 8, 7, 2: cliff before 8 (20 > 16) and before 2 (7 > 4).
  auto r = screen_main_entities(table({20, 8, 7, 2}), 3, ScreenRule::literal);
  EXPECT_EQ(r.main_entities, ids({1}));
  EXPECT_EQ(r.redundant_entities, ids({0, 2, 3}));
}

TEST(Screen, PartitionAndTauMonotonicityBruteForce) {
  // Every count vector over 4 entities with counts 0..8, tau 0..9.
  std::vector<std::size_t> c(4, 0);
  for (int code = 0; code < 9 * 9 * 9 * 9; ++code) {
    int x = code;
    for (auto& v : c) {
      v = static_cast<std::size_t>(x % 9);
      x /= 9;
    }
    std::set<EntityId> prev_s;
    for (std::size_t tau = 10; tau-- > 0;) {
      for (auto rule : {ScreenRule::prefix_cut, ScreenRule::literal}) {
        auto r = screen_main_entities(table(c), tau, rule);
        std::set<EntityId> both, nonzero;
        std::set_intersection(r.main_entities.begin(), r.main_entities.end(), r.redundant_entities.begin(),
                              r.redundant_entities.end(), std::inserter(both, both.end()));
        ASSERT_TRUE(both.empty());
        for (EntityId i = 0; i < c.size(); ++i) {
          if (c[i]) nonzero.insert(i);
        }
        std::set<EntityId> uni = r.main_entities;
        uni.insert(r.redundant_entities.begin(), r.redundant_entities.end());
        ASSERT_EQ(uni, nonzero);
      }
      // Lowering tau never shrinks S under the prefix rule.
      auto s = screen_main_entities(table(c), tau).main_entities;
      ASSERT_TRUE(std::includes(s.begin(), s.end(), prev_s.begin(), prev_s.end()));
      prev_s = s;
    }
  }
}

TEST(Filter, DropsCaptionsMentioningOnlyRedundantEntities) {
  auto v = EntityVocabulary::parse("person\ntree\nroad\n");
  auto caps = captions_of(v, {"a tree by a road", "a person walks"});
  ScreenResult r;
  r.main_entities = {0};
  r.redundant_entities = {1, 2};
  auto kept = filter_captions(caps, r);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].text, "a person walks");
}

TEST(Filter, VacuousScreenKeepsEverything) {
  auto v = EntityVocabulary::parse("person\n");
  auto caps = captions_of(v, {"sky", "clouds"});
  EXPECT_EQ(filter_captions(caps, ScreenResult{}).size(), 2u);
}

TEST(Filter, MixedMainAndRedundantIsKept) {
  auto v = EntityVocabulary::parse("person\ntree\n");
  auto caps = captions_of(v, {"a person under a tree", "a tree", "nothing here"});
  ScreenResult r;
  r.main_entities = {0};
  r.redundant_entities = {1};
  auto kept = filter_captions(caps, r);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].text, "a person under a tree");
  EXPECT_EQ(kept[1].text, "nothing here");
}

TEST(Filter, IdempotentAndOrderPreserving) {
  auto v = EntityVocabulary::parse("person\ntree\ncar\n");
  auto caps = captions_of(v, {"a car", "a person", "a tree", "a person and a car", "sky", "a tree and a car"});
  for (int mask = 0; mask < 8; ++mask) {
    ScreenResult r;
    for (EntityId i = 0; i < 3; ++i) (mask >> i & 1 ? r.main_entities : r.redundant_entities).insert(i);
    auto once = filter_captions(caps, r);
    auto twice = filter_captions(once, r);
    EXPECT_EQ(once, twice);
    for (std::size_t i = 1; i < once.size(); ++i) EXPECT_LT(once[i - 1].frame_id, once[i].frame_id);
  }
}

TEST(Horizon, KeepsMostRecentCaptions) {
  CaptionHorizon h(3);
  for (FrameId i = 0; i < 5; ++i) h.push(Caption{"c", i, Timestamp{0}, 0, {}});
  auto items = h.items();
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items.front().frame_id, 2);
  EXPECT_EQ(items.back().frame_id, 4);
}
