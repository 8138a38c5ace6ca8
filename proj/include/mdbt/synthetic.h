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

#ifndef MDBT_SYNTHETIC_H_
#define MDBT_SYNTHETIC_H_

#include <cstdint>

#include "mdbt/corpus.h"
#include "mdbt/embeddings.h"
#include "mdbt/ontology.h"

namespace mdbt {

// Shape of a generated corpus. Utterances come from fixed templates for the
// inform, request and confirm cases (plus content-free filler turns), so the
// belief labels are always recoverable from the surface text.
struct SyntheticSpec {
  int num_domains = 3;
  int slots_per_domain = 3;
  int values_per_slot = 5;
  int train_dialogues = 200;
  int dev_dialogues = 50;
  int test_dialogues = 50;
  int min_turns = 2;
  int max_turns = 5;
  int max_domains_per_dialogue = 2;
  double filler_probability = 0.15;  // turns after the first
};

struct SyntheticCorpus {
  CorpusSplit corpus;
  Ontology ontology;
};

// Deterministic given (spec, seed). Values are drawn uniformly per slot and
// cases uniformly from {inform, request, confirm}.
SyntheticCorpus GenerateSynthetic(const SyntheticSpec &spec, uint64_t seed);

// Unit vectors for every token of the corpus and ontology, including "none".
// Ontology terms are clustered: each mixes its domain's (and slot's) random
// centre with its own noise, so related terms are close as in a specialised
// space. All other tokens are independent random directions.
EmbeddingTable SyntheticEmbeddings(const SyntheticCorpus &data, int dimension, uint64_t seed);

}  // namespace mdbt

#endif  // MDBT_SYNTHETIC_H_
