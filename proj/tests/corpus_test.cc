// Copyright 2026 The MDBT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdbt/corpus.h"

#include <gtest/gtest.h>

#include "fixtures.h"
#include "mdbt/common.h"

namespace mdbt {
namespace {

using testing::SmallOntology;
using testing::TempDir;

constexpr const char *kOneDialogue = R"({
  "dialogues": [{"id": "d1", "goal": "eat", "turns": [
    {"system": "", "user": "I want Turkish food", "belief": {"restaurant": {"food": "turkish"}}},
    {"system": "Which area?", "user": "north", "belief": {"restaurant": {"food": "turkish", "area": "north"}}}
  ]}],
  "split": {"train": ["d1"], "dev": [], "test": []}
})";

TEST(Corpus, LoadsSmallestValidFile) {
  CorpusSplit c = ParseCorpus(kOneDialogue, SmallOntology());
  ASSERT_EQ(c.train.size(), 1u);
  EXPECT_TRUE(c.dev.empty());
  EXPECT_EQ(c.train[0].turns.size(), 2u);
  EXPECT_EQ(c.train[0].turns[0].user_tokens, (std::vector<std::string>{"i", "want", "turkish", "food"}));
  EXPECT_TRUE(c.train[0].turns[0].system_tokens.empty());
}

TEST(Corpus, UnknownValueIsNamed) {
  std::string text = kOneDialogue;
  text.replace(text.find("\"turkish\"}}}"), 9, "\"klingon\"");
  try {
    ParseCorpus(text, SmallOntology());
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("klingon"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("d1"), std::string::npos) << e.what();
  }
}

TEST(Corpus, StructuralErrors) {
  const Ontology o = SmallOntology();
  EXPECT_THROW(ParseCorpus("{", o), ValidationError);
  EXPECT_THROW(ParseCorpus(R"({"dialogues": 3})", o), ValidationError);
  EXPECT_THROW(ParseCorpus(R"({"dialogues":[{"id":"a","turns":[]}],"split":{"train":["a"]}})", o),
               ValidationError);
  // Same id in two splits.
  EXPECT_THROW(ParseCorpus(R"({"dialogues":[{"id":"a","turns":[{"system":"","user":"hi","belief":{}}]}],
                              "split":{"train":["a"],"dev":["a"]}})", o),
               ValidationError);
  // Empty user utterance.
  EXPECT_THROW(ParseCorpus(R"({"dialogues":[{"id":"a","turns":[{"system":"","user":" ! ","belief":{}}]}],
                              "split":{"train":["a"]}})", o),
               ValidationError);
  EXPECT_THROW(LoadCorpus("/nonexistent/corpus.json", o), ValidationError);
}

TEST(Corpus, SaveLoadRoundTripIsByteIdentical) {
  TempDir dir("corpus");
  const Ontology o = SmallOntology();
  CorpusSplit c = ParseCorpus(kOneDialogue, o);
  SaveCorpus(c, dir / "a.json");
  CorpusSplit again = LoadCorpus(dir / "a.json", o);
  SaveCorpus(again, dir / "b.json");
  EXPECT_EQ(ReadFile(dir / "a.json"), ReadFile(dir / "b.json"));
  EXPECT_EQ(CorpusToJson(again), CorpusToJson(c));
}

TEST(SplitLabels, EmptyBeliefIsAllNone) {
  const Ontology o = SmallOntology();
  Dialogue d;
  d.id = "e";
  d.turns.push_back(MakeTurn("", "hello"));
  DialogueLabels l = SplitLabels(d, o);
  EXPECT_EQ(l.domains.active[0], (std::vector<int>{0, 0}));
  for (int s = 0; s < o.num_slots(); ++s) EXPECT_EQ(l.slots.value[0][s], o.NoneIndex(s));
}

TEST(SplitLabels, SingleGoalSetsOneDomainAndOneHot) {
  const Ontology o = SmallOntology();
  Dialogue d;
  d.id = "f";
  d.turns.push_back(MakeTurn("", "turkish food", {{"restaurant", "food", "turkish"}}));
  DialogueLabels l = SplitLabels(d, o);
  EXPECT_EQ(l.domains.active[0], (std::vector<int>{1, 0}));
  EXPECT_EQ(l.slots.OneHot(o, 0, 0), (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(l.slots.OneHot(o, 0, 1), (std::vector<double>{0, 0, 1}));
}

TEST(SplitLabels, CumulativeBeliefActivatesBothDomains) {
  const Ontology o = SmallOntology();
  Dialogue d;
  d.id = "g";
  d.turns.push_back(MakeTurn("", "turkish food", {{"restaurant", "food", "turkish"}}));
  d.turns.push_back(MakeTurn("anything else ?", "a hotel with free parking",
                             {{"restaurant", "food", "turkish"}, {"hotel", "parking", "free"}}));
  DialogueLabels l = SplitLabels(d, o);
  EXPECT_EQ(l.domains.active[1], (std::vector<int>{1, 1}));
  EXPECT_EQ(l.slots.value[1][0], 0);
  EXPECT_EQ(l.slots.value[1][2], 0);
}

TEST(SplitLabels, OneHotSumsToOne) {
  const Ontology o = SmallOntology();
  DialogueLabels l = SplitLabels(testing::SmallDialogue(), o);
  for (size_t t = 0; t < l.slots.value.size(); ++t) {
    for (int s = 0; s < o.num_slots(); ++s) {
      double sum = 0;
      for (double x : l.slots.OneHot(o, static_cast<int>(t), s)) sum += x;
      EXPECT_EQ(sum, 1.0);
    }
  }
}

TEST(CorpusStats, CountsSingleAndMultiDomain) {
  const Ontology o = SmallOntology();
  Dialogue multi;
  multi.id = "m";
  multi.turns.push_back(MakeTurn("", "turkish food and free parking",
                                 {{"restaurant", "food", "turkish"}, {"hotel", "parking", "free"}}));
  CorpusStats s = ComputeStats({testing::SmallDialogue(), multi}, o);
  EXPECT_EQ(s.dialogues, 2);
  EXPECT_EQ(s.single_domain, 1);
  EXPECT_EQ(s.multi_domain, 1);
  EXPECT_EQ(s.turns, 3);
}

}  // namespace
}  // namespace mdbt
