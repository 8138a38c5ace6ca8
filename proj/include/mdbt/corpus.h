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

#ifndef MDBT_CORPUS_H_
#define MDBT_CORPUS_H_

#include <string>
#include <string_view>
#include <vector>

#include "mdbt/ontology.h"

namespace mdbt {

struct BeliefEntry {
  std::string domain;
  std::string slot;
  std::string value;

  bool operator==(const BeliefEntry &) const = default;
};

struct Turn {
  std::string system;  // may be empty on the first turn
  std::string user;
  std::vector<std::string> system_tokens;
  std::vector<std::string> user_tokens;
  // Slots absent from the belief are labelled "none".
  std::vector<BeliefEntry> belief;
};

struct Dialogue {
  std::string id;
  std::string goal;
  std::vector<Turn> turns;
};

struct CorpusSplit {
  std::vector<Dialogue> train;
  std::vector<Dialogue> dev;
  std::vector<Dialogue> test;
};

// t(d) per turn, per domain: 1 iff any slot of d is in the cumulative belief.
struct DomainLabels {
  std::vector<std::vector<int>> active;  // [turn][domain]
};

// One-hot target per turn, per flat slot index, stored as the index of the
// hot candidate (the "none" index for unmentioned slots).
struct SlotValueLabels {
  std::vector<std::vector<int>> value;  // [turn][slot]

  std::vector<double> OneHot(const Ontology &ontology, int turn, int slot) const;
};

struct DialogueLabels {
  DomainLabels domains;
  SlotValueLabels slots;
};

Turn MakeTurn(std::string system, std::string user, std::vector<BeliefEntry> belief = {});

// Parses the corpus schema and validates every belief term against the
// ontology. A file without a "split" object puts every dialogue in train.
CorpusSplit ParseCorpus(std::string_view json_text, const Ontology &ontology);
CorpusSplit LoadCorpus(const std::string &path, const Ontology &ontology);

std::string CorpusToJson(const CorpusSplit &corpus);
void SaveCorpus(const CorpusSplit &corpus, const std::string &path);

void ValidateDialogue(const Dialogue &dialogue, const Ontology &ontology);

// Splits the per-turn belief into disjoint domain and slot-value targets.
// Beliefs accumulate: a slot set at turn t stays set (or is overwritten by a
// later value) for every following turn.
DialogueLabels SplitLabels(const Dialogue &dialogue, const Ontology &ontology);

struct CorpusStats {
  int dialogues = 0;
  int single_domain = 0;  // one domain in the final cumulative belief
  int multi_domain = 0;   // two or more
  int turns = 0;
  double mean_user_tokens = 0;
  double mean_system_tokens = 0;
};

CorpusStats ComputeStats(const std::vector<Dialogue> &dialogues, const Ontology &ontology);

}  // namespace mdbt

#endif  // MDBT_CORPUS_H_
