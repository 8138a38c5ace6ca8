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

#include "mdbt/belief_update.h"

#include <cmath>

#include "mdbt/common.h"

namespace mdbt {

std::string ToString(UpdateVariant variant) {
  switch (variant) {
    case UpdateVariant::kPlainRnn: return "plain-rnn";
    case UpdateVariant::kMemoryRnn: return "memory-rnn";
    case UpdateVariant::kLstm: return "lstm";
  }
  return "?";
}

UpdateVariant ParseUpdateVariant(const std::string &text) {
  if (text == "plain-rnn" || text == "plain") return UpdateVariant::kPlainRnn;
  if (text == "memory-rnn" || text == "memory") return UpdateVariant::kMemoryRnn;
  if (text == "lstm") return UpdateVariant::kLstm;
  throw ValidationError("unknown update variant '" + text +
                        "' (expected plain-rnn, memory-rnn or lstm)");
}

std::string ToString(BeliefMode mode) {
  return mode == BeliefMode::kRecurrent ? "recurrent" : "pass-through";
}

BeliefMode ParseBeliefMode(const std::string &text) {
  if (text == "recurrent") return BeliefMode::kRecurrent;
  if (text == "pass-through" || text == "passthrough") return BeliefMode::kPassThrough;
  throw ValidationError("unknown belief mode '" + text + "' (expected recurrent or pass-through)");
}

Eigen::MatrixXd ConstrainedMatrix::Materialize(int n) const {
  if (n < 1) throw ValidationError("constrained matrix dimension must be >= 1");
  if (form == MatrixForm::kScalarDiagonal) {
    return diagonal * Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, off_diagonal);
  m.diagonal().setConstant(diagonal);
  return m;
}

UpdateCell::UpdateCell(const std::string &prefix, MatrixForm form, UpdateVariant variant,
                       ParamGroup group, ParameterStore &store)
    : prefix_(prefix), form_(form), variant_(variant) {
  auto bias = [&](const std::string &name) {
    return store.Add(prefix_ + "." + name, 1, 1, ParamKind::kBias, group);
  };
  switch (variant_) {
    case UpdateVariant::kPlainRnn:
      wx_ = AddMatrix("Wx", group, store);
      wh_ = AddMatrix("Wh", group, store);
      bias_ = bias("b");
      break;
    case UpdateVariant::kMemoryRnn:
      wx_ = AddMatrix("Wx", group, store);
      wh_ = AddMatrix("Wh", group, store);
      wc_ = AddMatrix("Wc", group, store);
      wm1_ = AddMatrix("Wm1", group, store);
      wm2_ = AddMatrix("Wm2", group, store);
      bias_ = bias("b");
      break;
    case UpdateVariant::kLstm: {
      auto gate = [&](const std::string &name) {
        return Gate{AddMatrix(name + ".Wx", group, store), AddMatrix(name + ".Wh", group, store),
                    bias(name + ".b")};
      };
      input_ = gate("input");
      forget_ = gate("forget");
      output_ = gate("output");
      candidate_ = gate("cell");
      break;
    }
  }
}

int UpdateCell::AddMatrix(const std::string &name, ParamGroup group, ParameterStore &store) {
  MatrixParams m;
  m.name = name;
  const std::string base = prefix_ + "." + name;
  if (form_ == MatrixForm::kScalarDiagonal) {
    m.diagonal = store.Add(base + ".alpha", 1, 1, ParamKind::kWeight, group);
  } else {
    m.diagonal = store.Add(base + ".gamma", 1, 1, ParamKind::kWeight, group);
    m.off_diagonal = store.Add(base + ".lambda", 1, 1, ParamKind::kWeight, group);
  }
  matrices_.push_back(m);
  return static_cast<int>(matrices_.size()) - 1;
}

std::vector<std::pair<std::string, ConstrainedMatrix>> UpdateCell::Matrices(
    const ParameterStore &store) const {
  std::vector<std::pair<std::string, ConstrainedMatrix>> out;
  for (const auto &m : matrices_) {
    ConstrainedMatrix cm;
    cm.form = form_;
    cm.diagonal = store.at(m.diagonal).value(0, 0);
    if (m.off_diagonal >= 0) cm.off_diagonal = store.at(m.off_diagonal).value(0, 0);
    out.emplace_back(prefix_ + "." + m.name, cm);
  }
  return out;
}

ad::Var UpdateCell::Apply(const BoundParams &params, int matrix, ad::Var x,
                          const ad::Segments &segments) const {
  const MatrixParams &m = matrices_[matrix];
  if (form_ == MatrixForm::kScalarDiagonal) return ad::Scale(params[m.diagonal], x);
  return ad::ConstrainedApply(params[m.diagonal], params[m.off_diagonal], x, segments);
}

ad::Var UpdateCell::Activate(ad::Var pre) const {
  return form_ == MatrixForm::kScalarDiagonal ? ad::Sigmoid(pre) : pre;
}

UpdateCell::State UpdateCell::Initial(ad::Tape &tape, Eigen::Index width) const {
  const bool probability_state =
      form_ == MatrixForm::kScalarDiagonal && variant_ != UpdateVariant::kLstm;
  return {tape.Constant(ad::Matrix::Constant(1, width, probability_state ? 0.5 : 0.0)),
          tape.Constant(ad::Matrix::Zero(1, width))};
}

UpdateCell::State UpdateCell::Step(const BoundParams &params, const State &prev, ad::Var x,
                                   const ad::Segments &segments) const {
  if (x.rows() != 1 || x.cols() != prev.state.cols()) {
    throw ValidationError("update step: input width " + std::to_string(x.cols()) +
                          " does not match state width " + std::to_string(prev.state.cols()));
  }
  auto W = [&](int matrix, ad::Var v) { return Apply(params, matrix, v, segments); };
  switch (variant_) {
    case UpdateVariant::kPlainRnn: {
      ad::Var pre = ad::AddScalar(ad::Add(W(wx_, x), W(wh_, prev.state)), params[bias_]);
      return {Activate(pre), prev.memory};
    }
    case UpdateVariant::kMemoryRnn: {
      ad::Var memory = ad::Sigmoid(ad::Add(W(wm1_, x), W(wm2_, prev.memory)));
      ad::Var pre = ad::AddScalar(ad::Sum({W(wx_, x), W(wh_, prev.state), W(wc_, memory)}),
                                  params[bias_]);
      return {Activate(pre), memory};
    }
    case UpdateVariant::kLstm: {
      auto gate_pre = [&](const Gate &g) {
        return ad::AddScalar(ad::Add(W(g.wx, x), W(g.wh, prev.state)), params[g.bias]);
      };
      ad::Var i = ad::Sigmoid(gate_pre(input_));
      ad::Var f = ad::Sigmoid(gate_pre(forget_));
      ad::Var o = ad::Sigmoid(gate_pre(output_));
      ad::Var g = ad::Tanh(gate_pre(candidate_));
      ad::Var cell = ad::Add(ad::Mul(f, prev.memory), ad::Mul(i, g));
      return {ad::Mul(o, cell), cell};
    }
  }
  throw std::logic_error("unreachable");
}

ad::Var UpdateCell::Output(const State &state, const ad::Segments &segments) const {
  if (form_ == MatrixForm::kScalarDiagonal) {
    return variant_ == UpdateVariant::kLstm ? ad::Sigmoid(state.state) : state.state;
  }
  return ad::SegmentSoftmax(state.state, segments);
}

BeliefUpdate::BeliefUpdate(UpdateVariant domain_variant, UpdateVariant slot_variant,
                           ParameterStore &store)
    : domain_cell_("update.domain", MatrixForm::kScalarDiagonal, domain_variant,
                   ParamGroup::kDomain, store),
      slot_cell_("update.slot", MatrixForm::kDiagonalPlusOffDiagonal, slot_variant,
                 ParamGroup::kSlotValue, store) {}

std::vector<BeliefUpdate::TurnOutput> BeliefUpdate::Track(const BoundParams &params,
                                                          const std::vector<TurnLogits> &turns,
                                                          const ad::Segments &slot_segments,
                                                          BeliefMode mode) const {
  if (turns.empty()) throw ValidationError("cannot track an empty dialogue");
  std::vector<TurnOutput> out;
  out.reserve(turns.size());
  if (mode == BeliefMode::kPassThrough) {
    for (const auto &t : turns) {
      out.push_back({ad::Sigmoid(t.domain), ad::SegmentSoftmax(t.slot, slot_segments)});
    }
    return out;
  }
  ad::Tape &tape = *turns[0].domain.tape();
  const ad::Segments domain_segments{0, static_cast<int>(turns[0].domain.cols())};
  UpdateCell::State domain_state = domain_cell_.Initial(tape, turns[0].domain.cols());
  UpdateCell::State slot_state = slot_cell_.Initial(tape, turns[0].slot.cols());
  for (const auto &t : turns) {
    domain_state = domain_cell_.Step(params, domain_state, t.domain, domain_segments);
    slot_state = slot_cell_.Step(params, slot_state, t.slot, slot_segments);
    out.push_back({domain_cell_.Output(domain_state, domain_segments),
                   slot_cell_.Output(slot_state, slot_segments)});
  }
  return out;
}

Eigen::VectorXd JointBelief(double domain_prob, const Eigen::VectorXd &slot_probs) {
  if (!(domain_prob >= 0 && domain_prob <= 1)) {
    throw ValidationError("joint belief: domain probability outside [0, 1]");
  }
  if (slot_probs.size() == 0 || std::abs(slot_probs.sum() - 1.0) > 1e-6 ||
      (slot_probs.array() < 0).any()) {
    throw ValidationError("joint belief: slot probabilities do not form a distribution");
  }
  return domain_prob * slot_probs;
}

TurnBelief MakeTurnBelief(const Ontology &ontology, const Eigen::VectorXd &domain_probs,
                          const Eigen::VectorXd &flat_slot_probs) {
  TurnBelief belief;
  belief.domains = domain_probs;
  const auto &offsets = ontology.candidate_offsets();
  for (int s = 0; s < ontology.num_slots(); ++s) {
    Eigen::VectorXd p = flat_slot_probs.segment(offsets[s], offsets[s + 1] - offsets[s]);
    belief.joint.push_back(JointBelief(domain_probs[ontology.slot(s).domain], p));
    belief.slots.push_back(std::move(p));
  }
  return belief;
}

DialogueBelief TrackDialogue(ParameterStore &store, const BeliefUpdate &update,
                             const Ontology &ontology, const std::vector<TurnScores> &turns,
                             BeliefMode mode) {
  ad::Tape tape(/*record=*/false);
  BoundParams params(tape, store, /*trainable=*/false);
  std::vector<TurnLogits> logits;
  for (const auto &t : turns) {
    Eigen::VectorXd flat(ontology.total_candidates());
    const auto &offsets = ontology.candidate_offsets();
    for (int s = 0; s < ontology.num_slots(); ++s) {
      flat.segment(offsets[s], offsets[s + 1] - offsets[s]) = t.slot_logits.at(s);
    }
    logits.push_back({tape.Constant(t.domain_logits.transpose()), tape.Constant(flat.transpose())});
  }
  DialogueBelief belief;
  for (const auto &out : update.Track(params, logits, ontology.candidate_offsets(), mode)) {
    belief.turns.push_back(MakeTurnBelief(ontology, out.domain_probs.value().row(0).transpose(),
                                          out.slot_probs.value().row(0).transpose()));
  }
  return belief;
}

}  // namespace mdbt
