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

#ifndef MDBT_BELIEF_UPDATE_H_
#define MDBT_BELIEF_UPDATE_H_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mdbt/autodiff.h"
#include "mdbt/ontology.h"
#include "mdbt/params.h"
#include "mdbt/tracker.h"

namespace mdbt {

enum class UpdateVariant { kPlainRnn, kMemoryRnn, kLstm };
std::string ToString(UpdateVariant variant);
UpdateVariant ParseUpdateVariant(const std::string &text);

enum class BeliefMode { kRecurrent, kPassThrough };
std::string ToString(BeliefMode mode);
BeliefMode ParseBeliefMode(const std::string &text);

enum class MatrixForm {
  kScalarDiagonal,           // alpha * I
  kDiagonalPlusOffDiagonal,  // gamma * I + lambda * (1 - I)
};

// A recurrent weight matrix stored as one or two scalars; its dense form is
// only built on demand, for any runtime dimension n.
struct ConstrainedMatrix {
  MatrixForm form = MatrixForm::kScalarDiagonal;
  double diagonal = 0;      // alpha or gamma
  double off_diagonal = 0;  // lambda; unused for the scalar-diagonal form

  Eigen::MatrixXd Materialize(int n) const;
  int trainable_scalars() const { return form == MatrixForm::kScalarDiagonal ? 1 : 2; }
};

// One recurrent cell family shared by every domain (scalar-diagonal weights,
// sigmoid state) or by every slot (diagonal-plus-off-diagonal weights,
// identity state, softmax readout). Inputs are the per-turn logits.
//
//   plain-rnn:  s' = phi(Wx x + Wh s + b)
//   memory-rnn: m' = sigmoid(Wm1 x + Wm2 m);  s' = phi(Wx x + Wh s + Wc m' + b)
//   lstm:       i,f,o = sigmoid(Wx* x + Wh* h + b*);  g = tanh(Wxg x + Whg h + bg)
//               c' = f c + i g;  h' = o c'
class UpdateCell {
 public:
  struct State {
    ad::Var state;   // s, or h for the lstm
    ad::Var memory;  // m, or c for the lstm
  };

  UpdateCell(const std::string &prefix, MatrixForm form, UpdateVariant variant, ParamGroup group,
             ParameterStore &store);

  MatrixForm form() const { return form_; }
  UpdateVariant variant() const { return variant_; }

  State Initial(ad::Tape &tape, Eigen::Index width) const;
  // x and the state are 1 x width rows; segments partition the width (one
  // segment per slot, or one per domain for the scalar-diagonal form).
  State Step(const BoundParams &params, const State &prev, ad::Var x,
             const ad::Segments &segments) const;
  // Probability readout: sigmoid-valued state (or sigmoid(h) for the lstm)
  // for domains; per-segment softmax for slots.
  ad::Var Output(const State &state, const ad::Segments &segments) const;

  std::vector<std::pair<std::string, ConstrainedMatrix>> Matrices(const ParameterStore &store) const;

 private:
  struct MatrixParams {
    std::string name;
    int diagonal = -1;
    int off_diagonal = -1;
  };

  int AddMatrix(const std::string &name, ParamGroup group, ParameterStore &store);
  ad::Var Apply(const BoundParams &params, int matrix, ad::Var x, const ad::Segments &segments) const;
  ad::Var Activate(ad::Var pre) const;

  std::string prefix_;
  MatrixForm form_;
  UpdateVariant variant_;
  std::vector<MatrixParams> matrices_;
  // Indices into matrices_ / the store, by role.
  int wx_ = -1, wh_ = -1, wc_ = -1, wm1_ = -1, wm2_ = -1, bias_ = -1;
  struct Gate {
    int wx, wh, bias;
  };
  Gate input_{}, forget_{}, output_{}, candidate_{};
};

class BeliefUpdate {
 public:
  BeliefUpdate(UpdateVariant domain_variant, UpdateVariant slot_variant, ParameterStore &store);

  const UpdateCell &domain_cell() const { return domain_cell_; }
  const UpdateCell &slot_cell() const { return slot_cell_; }

  struct TurnOutput {
    ad::Var domain_probs;  // 1 x #domains
    ad::Var slot_probs;    // 1 x #candidates, softmax within each slot
  };

  std::vector<TurnOutput> Track(const BoundParams &params, const std::vector<TurnLogits> &turns,
                                const ad::Segments &slot_segments, BeliefMode mode) const;

 private:
  UpdateCell domain_cell_;
  UpdateCell slot_cell_;
};

// Beliefs for one turn: P(d), P(s, .) and the joint P(d, s, .) = P(d) P(s, .)
// for every slot (flat order).
struct TurnBelief {
  Eigen::VectorXd domains;
  std::vector<Eigen::VectorXd> slots;
  std::vector<Eigen::VectorXd> joint;
};

struct DialogueBelief {
  std::vector<TurnBelief> turns;
};

Eigen::VectorXd JointBelief(double domain_prob, const Eigen::VectorXd &slot_probs);

TurnBelief MakeTurnBelief(const Ontology &ontology, const Eigen::VectorXd &domain_probs,
                          const Eigen::VectorXd &flat_slot_probs);

// Runs the update over precomputed per-turn scores (value-only).
DialogueBelief TrackDialogue(ParameterStore &store, const BeliefUpdate &update,
                             const Ontology &ontology, const std::vector<TurnScores> &turns,
                             BeliefMode mode);

}  // namespace mdbt

#endif  // MDBT_BELIEF_UPDATE_H_
