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

#ifndef MDBT_MODEL_H_
#define MDBT_MODEL_H_

#include <random>
#include <vector>

#include "mdbt/belief_update.h"
#include "mdbt/encoders.h"
#include "mdbt/params.h"
#include "mdbt/tracker.h"

namespace mdbt {

struct ModelConfig {
  EncoderKind encoder = EncoderKind::kCnn;
  int embedding_dim = 300;
  int hidden_dim = 64;
  UpdateVariant domain_update = UpdateVariant::kMemoryRnn;
  UpdateVariant slot_update = UpdateVariant::kMemoryRnn;
  BeliefMode mode = BeliefMode::kRecurrent;
  double dropout = 0.5;  // on encoder outputs
  // Also drop out the similarity vectors h * tanh(W e + b).
  bool similarity_dropout = true;
};

// Encoders, similarity/decision heads and the belief-update cells, with all
// their parameters in one store. Nothing here is sized by the ontology.
class BeliefTracker {
 public:
  explicit BeliefTracker(const ModelConfig &config);

  const ModelConfig &config() const { return config_; }
  ParameterStore &params() { return store_; }
  const ParameterStore &params() const { return store_; }
  const EncoderBank &encoders() const { return encoders_; }
  const TrackerHeads &heads() const { return heads_; }
  const BeliefUpdate &update() const { return update_; }

  // Differentiable forward pass over one dialogue. Dropout is active only
  // when dropout_rng is non-null.
  std::vector<BeliefUpdate::TurnOutput> Forward(const BoundParams &params,
                                                const OntologyTerms &terms,
                                                const std::vector<EmbeddedTurn> &turns,
                                                std::mt19937_64 *dropout_rng) const;

  // Inference: no dropout, no gradient bookkeeping.
  DialogueBelief Track(const Ontology &ontology, const OntologyTerms &terms,
                       const std::vector<EmbeddedTurn> &turns);

 private:
  ModelConfig config_;
  ParameterStore store_;
  EncoderBank encoders_;
  TrackerHeads heads_;
  BeliefUpdate update_;
};

std::vector<EmbeddedTurn> EmbedDialogue(const Dialogue &dialogue, const EmbeddingTable &table);

}  // namespace mdbt

#endif  // MDBT_MODEL_H_
