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

#ifndef MDBT_TRACKER_H_
#define MDBT_TRACKER_H_

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mdbt/autodiff.h"
#include "mdbt/corpus.h"
#include "mdbt/embeddings.h"
#include "mdbt/encoders.h"
#include "mdbt/ontology.h"
#include "mdbt/params.h"

namespace mdbt {

// Ontology term embeddings laid out for batched scoring. Candidate columns
// follow Ontology::candidate_offsets(); value terms are deduplicated.
struct OntologyTerms {
  ad::Matrix domains;             // D x #domains
  ad::Matrix slots;               // D x #slots (flat order)
  ad::Matrix values;              // D x #unique value terms (incl. "none")
  std::vector<int> candidate_term;  // candidate column -> values column
  std::vector<int> candidate_slot;  // candidate column -> flat slot index
  ad::Segments segments;          // candidate offsets per slot

  static OntologyTerms Build(const Ontology &ontology, const EmbeddingTable &table);
};

// Token embeddings of one turn, computed once per corpus.
struct EmbeddedTurn {
  ad::Matrix user;    // D x T_user
  ad::Matrix system;  // D x T_system
};

EmbeddedTurn EmbedTurn(const Turn &turn, const EmbeddingTable &table);

// Similarity projections (one per role, shared by the user and system
// sides) and the four decision heads. Shapes depend on (L, D) only.
class TrackerHeads {
 public:
  TrackerHeads(int embedding_dim, int hidden_dim, double dropout, ParameterStore &store);

  struct Projection {
    int w, b;
  };
  struct Head {
    int w, b;
  };

  Projection domain_projection, slot_projection, value_projection;
  Head domain_head, inform_head, request_head, affirm_head;

  int hidden_dim() const { return hidden_dim_; }
  double dropout() const { return dropout_; }

 private:
  int hidden_dim_;
  double dropout_;
};

// tanh(W e + b) for every term column, computed once per tape.
struct ProjectedTerms {
  ad::Var domains;     // L x #domains
  ad::Var slots;       // L x #slots
  ad::Var candidates;  // L x #candidates
};

ProjectedTerms ProjectTerms(const BoundParams &params, const TrackerHeads &heads,
                            const OntologyTerms &terms);

struct TurnLogits {
  ad::Var domain;  // 1 x #domains, pre-sigmoid
  ad::Var slot;    // 1 x #candidates, pre-softmax (y_inf + y_req + y_af)
};

// Runs the seven encoders once and scores every domain and every candidate of
// every slot. Dropout on encoder outputs and similarity vectors is applied
// only when dropout_rng is non-null.
TurnLogits ScoreTurnLogits(const BoundParams &params, const EncoderBank &encoders,
                           const TrackerHeads &heads, const OntologyTerms &terms,
                           const ProjectedTerms &projected, const EmbeddedTurn &turn,
                           std::mt19937_64 *dropout_rng);

// Per-turn scores without the belief-update recurrence.
struct TurnScores {
  Eigen::VectorXd domain_logits;
  Eigen::VectorXd domain_probs;
  std::vector<Eigen::VectorXd> slot_logits;  // per flat slot, over candidates
  std::vector<Eigen::VectorXd> slot_probs;
};

TurnScores ScoreTurn(ParameterStore &store, const EncoderBank &encoders, const TrackerHeads &heads,
                     const OntologyTerms &terms, const EmbeddedTurn &turn);

// Single-item forms of the scoring equations, on plain vectors.
Eigen::VectorXd Similarity(const Eigen::VectorXd &h, const Eigen::VectorXd &e,
                           const Eigen::MatrixXd &w, const Eigen::VectorXd &b);
double DomainProbability(const Eigen::VectorXd &d_usr, const Eigen::VectorXd &d_sys,
                         const Eigen::VectorXd &w, double b);

struct CaseScores {
  double inform;
  double request;
  double affirm;
};

CaseScores ScoreCases(const Eigen::VectorXd &s_usr, const Eigen::VectorXd &s_sys,
                      const Eigen::VectorXd &v_usr, const Eigen::VectorXd &v_sys,
                      const Eigen::VectorXd &h_affirm, const Eigen::VectorXd &w_inf, double b_inf,
                      const Eigen::VectorXd &w_req, double b_req, const Eigen::VectorXd &w_af,
                      double b_af);

// Max-shifted softmax. Throws on NaN input.
Eigen::VectorXd SlotDistribution(const Eigen::VectorXd &logits);

double Sigmoid(double x);

}  // namespace mdbt

#endif  // MDBT_TRACKER_H_
