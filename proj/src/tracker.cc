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

#include "mdbt/tracker.h"

#include <cmath>
#include <map>

#include "mdbt/common.h"

namespace mdbt {

OntologyTerms OntologyTerms::Build(const Ontology &ontology, const EmbeddingTable &table) {
  OntologyTerms terms;
  const int D = table.dimension();
  terms.domains.resize(D, ontology.num_domains());
  for (int d = 0; d < ontology.num_domains(); ++d) {
    terms.domains.col(d) = TermEmbedding(table, ontology.domains()[d].name);
  }
  terms.slots.resize(D, ontology.num_slots());
  std::map<std::string, int> value_index;
  std::vector<Eigen::VectorXd> values;
  for (int s = 0; s < ontology.num_slots(); ++s) {
    terms.slots.col(s) = TermEmbedding(table, ontology.slot(s).slot_name);
    for (const auto &v : ontology.Candidates(s)) {
      auto [it, inserted] = value_index.emplace(v, static_cast<int>(values.size()));
      if (inserted) values.push_back(TermEmbedding(table, v));
      terms.candidate_term.push_back(it->second);
      terms.candidate_slot.push_back(s);
    }
  }
  terms.values.resize(D, static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) terms.values.col(static_cast<Eigen::Index>(i)) = values[i];
  terms.segments = ontology.candidate_offsets();
  return terms;
}

EmbeddedTurn EmbedTurn(const Turn &turn, const EmbeddingTable &table) {
  return {table.EmbedSequence(turn.user_tokens), table.EmbedSequence(turn.system_tokens)};
}

TrackerHeads::TrackerHeads(int embedding_dim, int hidden_dim, double dropout, ParameterStore &store)
    : hidden_dim_(hidden_dim), dropout_(dropout) {
  const int D = embedding_dim, L = hidden_dim;
  auto projection = [&](const std::string &role, ParamGroup group) {
    return Projection{store.Add("similarity." + role + ".W", L, D, ParamKind::kWeight, group),
                      store.Add("similarity." + role + ".b", L, 1, ParamKind::kBias, group)};
  };
  domain_projection = projection("domain", ParamGroup::kDomain);
  slot_projection = projection("slot", ParamGroup::kSlotValue);
  value_projection = projection("value", ParamGroup::kSlotValue);
  auto head = [&](const std::string &name, int inputs, ParamGroup group) {
    return Head{store.Add("decision." + name + ".w", inputs * L, 1, ParamKind::kWeight, group),
                store.Add("decision." + name + ".b", 1, 1, ParamKind::kBias, group)};
  };
  domain_head = head("domain", 2, ParamGroup::kDomain);
  inform_head = head("inform", 2, ParamGroup::kSlotValue);
  request_head = head("request", 2, ParamGroup::kSlotValue);
  affirm_head = head("affirm", 3, ParamGroup::kSlotValue);
}

ProjectedTerms ProjectTerms(const BoundParams &params, const TrackerHeads &heads,
                            const OntologyTerms &terms) {
  ad::Tape &tape = *params[0].tape();
  auto project = [&](const TrackerHeads::Projection &p, const ad::Matrix &embeddings) {
    ad::Var e = tape.Constant(embeddings);
    return ad::Tanh(ad::AddColumn(ad::MatMul(params[p.w], e), params[p.b]));
  };
  ProjectedTerms out;
  out.domains = project(heads.domain_projection, terms.domains);
  out.slots = project(heads.slot_projection, terms.slots);
  out.candidates = ad::GatherCols(project(heads.value_projection, terms.values), terms.candidate_term);
  return out;
}

TurnLogits ScoreTurnLogits(const BoundParams &params, const EncoderBank &encoders,
                           const TrackerHeads &heads, const OntologyTerms &terms,
                           const ProjectedTerms &projected, const EmbeddedTurn &turn,
                           std::mt19937_64 *dropout_rng) {
  using ad::Var;
  const Eigen::Index L = heads.hidden_dim();
  auto encode = [&](EncoderRole role, const ad::Matrix &x) {
    return encoders.Encode(params, role, x, dropout_rng);
  };
  Var h_usr_domain = encode(EncoderRole::kUserDomain, turn.user);
  Var h_usr_slot = encode(EncoderRole::kUserSlot, turn.user);
  Var h_usr_value = encode(EncoderRole::kUserValue, turn.user);
  Var h_sys_domain = encode(EncoderRole::kSystemDomain, turn.system);
  Var h_sys_slot = encode(EncoderRole::kSystemSlot, turn.system);
  Var h_sys_value = encode(EncoderRole::kSystemValue, turn.system);
  Var h_affirm = encode(EncoderRole::kUserAffirm, turn.user);

  const double rate = heads.dropout();
  auto similar = [&](Var terms_projected, Var h) {
    return Dropout(ad::ScaleRows(terms_projected, h), rate, dropout_rng);
  };
  auto part = [&](const TrackerHeads::Head &head, int block) {
    return ad::SliceRows(params[head.w], block * L, L);
  };

  TurnLogits out;
  Var d_usr = similar(projected.domains, h_usr_domain);
  Var d_sys = similar(projected.domains, h_sys_domain);
  out.domain = ad::AddScalar(ad::Add(ad::RowDot(part(heads.domain_head, 0), d_usr),
                                     ad::RowDot(part(heads.domain_head, 1), d_sys)),
                             params[heads.domain_head.b]);

  Var s_usr = similar(projected.slots, h_usr_slot);
  Var s_sys = similar(projected.slots, h_sys_slot);
  Var v_usr = similar(projected.candidates, h_usr_value);
  Var v_sys = similar(projected.candidates, h_sys_value);
  auto per_slot = [&](Var row) { return ad::GatherCols(row, terms.candidate_slot); };

  // y_inf = w_inf . (s_usr ⊕ v_usr) + b_inf
  Var y_inf = ad::AddScalar(ad::Add(per_slot(ad::RowDot(part(heads.inform_head, 0), s_usr)),
                                    ad::RowDot(part(heads.inform_head, 1), v_usr)),
                            params[heads.inform_head.b]);
  // y_req = w_req . (s_sys ⊕ v_usr) + b_req
  Var y_req = ad::AddScalar(ad::Add(per_slot(ad::RowDot(part(heads.request_head, 0), s_sys)),
                                    ad::RowDot(part(heads.request_head, 1), v_usr)),
                            params[heads.request_head.b]);
  // y_af = w_af . (s_sys ⊕ v_sys ⊕ h_affirm) + b_af
  Var affirm_const = ad::Add(ad::RowDot(part(heads.affirm_head, 2), h_affirm),
                             params[heads.affirm_head.b]);
  Var y_af = ad::AddScalar(ad::Add(per_slot(ad::RowDot(part(heads.affirm_head, 0), s_sys)),
                                   ad::RowDot(part(heads.affirm_head, 1), v_sys)),
                           affirm_const);
  out.slot = ad::Sum({y_inf, y_req, y_af});
  return out;
}

TurnScores ScoreTurn(ParameterStore &store, const EncoderBank &encoders, const TrackerHeads &heads,
                     const OntologyTerms &terms, const EmbeddedTurn &turn) {
  ad::Tape tape(/*record=*/false);
  BoundParams params(tape, store, /*trainable=*/false);
  ProjectedTerms projected = ProjectTerms(params, heads, terms);
  TurnLogits logits = ScoreTurnLogits(params, encoders, heads, terms, projected, turn, nullptr);
  TurnScores scores;
  scores.domain_logits = logits.domain.value().row(0).transpose();
  scores.domain_probs = scores.domain_logits.unaryExpr([](double x) { return Sigmoid(x); });
  const ad::Matrix &slot = logits.slot.value();
  for (size_t k = 0; k + 1 < terms.segments.size(); ++k) {
    int b = terms.segments[k], n = terms.segments[k + 1] - b;
    Eigen::VectorXd row = slot.row(0).segment(b, n).transpose();
    scores.slot_probs.push_back(SlotDistribution(row));
    scores.slot_logits.push_back(std::move(row));
  }
  return scores;
}

Eigen::VectorXd Similarity(const Eigen::VectorXd &h, const Eigen::VectorXd &e,
                           const Eigen::MatrixXd &w, const Eigen::VectorXd &b) {
  if (w.cols() != e.size() || w.rows() != h.size() || b.size() != h.size()) {
    throw ValidationError("similarity: shape mismatch");
  }
  Eigen::VectorXd gate = (w * e + b).array().tanh().matrix();
  return h.cwiseProduct(gate);
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double DomainProbability(const Eigen::VectorXd &d_usr, const Eigen::VectorXd &d_sys,
                         const Eigen::VectorXd &w, double b) {
  if (w.size() != d_usr.size() + d_sys.size()) {
    throw ValidationError("domain probability: shape mismatch");
  }
  const Eigen::Index L = d_usr.size();
  return Sigmoid(w.head(L).dot(d_usr) + w.tail(d_sys.size()).dot(d_sys) + b);
}

CaseScores ScoreCases(const Eigen::VectorXd &s_usr, const Eigen::VectorXd &s_sys,
                      const Eigen::VectorXd &v_usr, const Eigen::VectorXd &v_sys,
                      const Eigen::VectorXd &h_affirm, const Eigen::VectorXd &w_inf, double b_inf,
                      const Eigen::VectorXd &w_req, double b_req, const Eigen::VectorXd &w_af,
                      double b_af) {
  const Eigen::Index L = s_usr.size();
  if (s_sys.size() != L || v_usr.size() != L || v_sys.size() != L || h_affirm.size() != L ||
      w_inf.size() != 2 * L || w_req.size() != 2 * L || w_af.size() != 3 * L) {
    throw ValidationError("score cases: shape mismatch");
  }
  CaseScores c;
  c.inform = w_inf.head(L).dot(s_usr) + w_inf.tail(L).dot(v_usr) + b_inf;
  c.request = w_req.head(L).dot(s_sys) + w_req.tail(L).dot(v_usr) + b_req;
  c.affirm = w_af.head(L).dot(s_sys) + w_af.segment(L, L).dot(v_sys) + w_af.tail(L).dot(h_affirm) + b_af;
  return c;
}

Eigen::VectorXd SlotDistribution(const Eigen::VectorXd &logits) {
  if (logits.size() == 0) throw ValidationError("slot distribution: no candidates");
  if (logits.hasNaN()) throw ValidationError("slot distribution: NaN logit");
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp().matrix();
  return p / p.sum();
}

}  // namespace mdbt
