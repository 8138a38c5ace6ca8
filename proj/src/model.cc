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

#include "mdbt/model.h"

namespace mdbt {
namespace {

EncoderConfig MakeEncoderConfig(const ModelConfig &config) {
  EncoderConfig e;
  e.kind = config.encoder;
  e.embedding_dim = config.embedding_dim;
  e.hidden_dim = config.hidden_dim;
  e.dropout = config.dropout;
  return e;
}

}  // namespace

// Members are initialised in declaration order, so store_ exists before the
// components register their parameters in it.
BeliefTracker::BeliefTracker(const ModelConfig &config)
    : config_(config),
      encoders_(MakeEncoderConfig(config), store_),
      heads_(config.embedding_dim, config.hidden_dim,
             config.similarity_dropout ? config.dropout : 0.0, store_),
      update_(config.domain_update, config.slot_update, store_) {}

std::vector<BeliefUpdate::TurnOutput> BeliefTracker::Forward(const BoundParams &params,
                                                             const OntologyTerms &terms,
                                                             const std::vector<EmbeddedTurn> &turns,
                                                             std::mt19937_64 *dropout_rng) const {
  ProjectedTerms projected = ProjectTerms(params, heads_, terms);
  std::vector<TurnLogits> logits;
  logits.reserve(turns.size());
  for (const auto &turn : turns) {
    logits.push_back(ScoreTurnLogits(params, encoders_, heads_, terms, projected, turn, dropout_rng));
  }
  return update_.Track(params, logits, terms.segments, config_.mode);
}

DialogueBelief BeliefTracker::Track(const Ontology &ontology, const OntologyTerms &terms,
                                    const std::vector<EmbeddedTurn> &turns) {
  ad::Tape tape(/*record=*/false);
  BoundParams params(tape, store_, /*trainable=*/false);
  DialogueBelief belief;
  for (const auto &out : Forward(params, terms, turns, nullptr)) {
    belief.turns.push_back(MakeTurnBelief(ontology, out.domain_probs.value().row(0).transpose(),
                                          out.slot_probs.value().row(0).transpose()));
  }
  return belief;
}

std::vector<EmbeddedTurn> EmbedDialogue(const Dialogue &dialogue, const EmbeddingTable &table) {
  std::vector<EmbeddedTurn> out;
  out.reserve(dialogue.turns.size());
  for (const auto &t : dialogue.turns) out.push_back(EmbedTurn(t, table));
  return out;
}

}  // namespace mdbt
