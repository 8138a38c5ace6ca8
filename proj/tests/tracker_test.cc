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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.h"
#include "mdbt/common.h"
#include "mdbt/model.h"

namespace mdbt {
namespace {

Eigen::VectorXd RandomVector(int n, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

TEST(Similarity, ZeroProjectionAnnihilates) {
  Eigen::VectorXd h = Eigen::VectorXd::Constant(3, 2.0), e = Eigen::VectorXd::Ones(4);
  EXPECT_EQ(Similarity(h, e, Eigen::MatrixXd::Zero(3, 4), Eigen::VectorXd::Zero(3)),
            Eigen::VectorXd::Zero(3));
}

TEST(Similarity, OnesIsIdentityForGate) {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 4);
  Eigen::VectorXd e = RandomVector(4, rng), b = RandomVector(3, rng);
  Eigen::VectorXd gate = (w * e + b).array().tanh().matrix();
  EXPECT_EQ(Similarity(Eigen::VectorXd::Ones(3), e, w, b), gate);
}

TEST(Similarity, HandExample) {
  // tanh(b) = 0.5 with W = 0.
  Eigen::Vector2d b = Eigen::Vector2d::Constant(std::atanh(0.5));
  Eigen::VectorXd out = Similarity(Eigen::Vector2d(1, -1), Eigen::Vector3d(1, 2, 3),
                                   Eigen::MatrixXd::Zero(2, 3), b);
  EXPECT_NEAR(out[0], 0.5, 1e-15);
  EXPECT_NEAR(out[1], -0.5, 1e-15);
  EXPECT_THROW(Similarity(Eigen::Vector2d(1, 1), Eigen::Vector3d(1, 2, 3), Eigen::MatrixXd::Zero(2, 2), b),
               ValidationError);
}

TEST(DomainProbability, ClosedForms) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(DomainProbability(zero, zero, Eigen::VectorXd::Zero(4), 0.0), 0.5);
  EXPECT_GT(DomainProbability(zero, zero, Eigen::VectorXd::Zero(4), 50.0), 0.999999);
  Eigen::VectorXd w(4);
  w << 1, 0, 0, 0;
  Eigen::VectorXd d_usr(2);
  d_usr << std::log(3.0) - 0.25, 7;
  EXPECT_NEAR(DomainProbability(d_usr, zero, w, 0.25), 0.75, 1e-15);
  EXPECT_THROW(DomainProbability(zero, zero, Eigen::VectorXd::Zero(3), 0.0), ValidationError);
}

TEST(ScoreCases, ZeroAndBiasIsolation) {
  const int L = 3;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(L), ones = Eigen::VectorXd::Ones(L);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(2 * L), w3 = Eigen::VectorXd::Zero(3 * L);
  CaseScores zero = ScoreCases(ones, ones, ones, ones, ones, w2, 0, w2, 0, w3, 0);
  EXPECT_EQ(zero.inform, 0);
  EXPECT_EQ(zero.request, 0);
  EXPECT_EQ(zero.affirm, 0);
  CaseScores bias = ScoreCases(ones, ones, ones, ones, ones, w2, 1, w2, 0, w3, 0);
  EXPECT_EQ(bias.inform, 1);
  EXPECT_EQ(bias.request, 0);
  EXPECT_EQ(bias.affirm, 0);
  EXPECT_THROW(ScoreCases(z, z, z, z, z, w3, 0, w2, 0, w3, 0), ValidationError);
}

TEST(ScoreCases, MatchesElementLoops) {
  std::mt19937_64 rng(17);
  const int L = 5;
  auto v = [&](int n) { return RandomVector(n, rng); };
  Eigen::VectorXd su = v(L), ss = v(L), vu = v(L), vs = v(L), ha = v(L);
  Eigen::VectorXd wi = v(2 * L), wr = v(2 * L), wa = v(3 * L);
  double inf = 0.3, req = -0.2, af = 0.1;
  for (int i = 0; i < L; ++i) {
    inf += wi[i] * su[i] + wi[L + i] * vu[i];
    req += wr[i] * ss[i] + wr[L + i] * vu[i];
    af += wa[i] * ss[i] + wa[L + i] * vs[i] + wa[2 * L + i] * ha[i];
  }
  CaseScores c = ScoreCases(su, ss, vu, vs, ha, wi, 0.3, wr, -0.2, wa, 0.1);
  EXPECT_NEAR(c.inform, inf, 1e-12);
  EXPECT_NEAR(c.request, req, 1e-12);
  EXPECT_NEAR(c.affirm, af, 1e-12);
}

TEST(SlotDistribution, ClosedForms) {
  Eigen::VectorXd p = SlotDistribution(Eigen::Vector3d(2, 2, 2));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / 3.0, 1e-15);
  p = SlotDistribution(Eigen::Vector2d(0, std::log(2.0)));
  EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-15);
  p = SlotDistribution(Eigen::Vector2d(1000, 1001));
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(p[1], 0.7310585786300049, 1e-15);
  EXPECT_THROW(SlotDistribution(Eigen::Vector2d(0, std::nan(""))), ValidationError);
  EXPECT_THROW(SlotDistribution(Eigen::VectorXd()), ValidationError);
}

TEST(SlotDistribution, ShiftInvariant) {
  Eigen::VectorXd logits(4);
  logits << 0.3, -1.2, 2.5, 0.0;
  Eigen::VectorXd shifted = (logits.array() + 17.0).matrix();
  EXPECT_LT((SlotDistribution(logits) - SlotDistribution(shifted)).cwiseAbs().maxCoeff(), 1e-15);
}

struct Fixture {
  Ontology ontology = testing::SmallOntology();
  EmbeddingTable table = testing::RandomTable(10);
  BeliefTracker model;
  explicit Fixture(uint64_t seed = 4, EncoderKind kind = EncoderKind::kCnn)
      : model(testing::TinyConfig(kind).model) {
    model.params().Initialize(seed);
  }
  TurnScores Score(const Ontology &o, const Turn &turn) {
    OntologyTerms terms = OntologyTerms::Build(o, table);
    return ScoreTurn(model.params(), model.encoders(), model.heads(), terms, EmbedTurn(turn, table));
  }
};

TEST(ScoreTurn, EmptyTurnWithZeroParamsIsMaximallyUncertain) {
  Fixture f;
  for (size_t i = 0; i < f.model.params().size(); ++i) f.model.params().at(static_cast<int>(i)).value.setZero();
  Turn empty;
  TurnScores s = f.Score(f.ontology, empty);
  for (Eigen::Index d = 0; d < s.domain_probs.size(); ++d) EXPECT_EQ(s.domain_probs[d], 0.5);
  for (const auto &p : s.slot_probs) {
    for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], 1.0 / p.size(), 1e-15);
  }
}

TEST(ScoreTurn, SevenEncoderCallsRegardlessOfOntologySize) {
  Fixture f;
  Ontology big = ParseOntology(
      R"({"a":{"x":["turkish","chinese","italian","north"],"y":["south"],"z":[]},
          "b":{"x":["free"]},"c":{"food":["paid"]},"d":{"area":["north"]}})");
  for (const Ontology *o : {&f.ontology, &big}) {
    const long before = f.model.encoders().invocations();
    f.Score(*o, MakeTurn("what area would you like ?", "i want turkish food"));
    EXPECT_EQ(f.model.encoders().invocations() - before, 7);
  }
}

TEST(ScoreTurn, DistributionsAreNormalisedAndPositive) {
  for (uint64_t seed : {1, 2, 3}) {
    Fixture f(seed, seed % 2 ? EncoderKind::kCnn : EncoderKind::kBiLstm);
    TurnScores s = f.Score(f.ontology, MakeTurn("would you like north ?", "yes please"));
    for (const auto &p : s.slot_probs) {
      EXPECT_NEAR(p.sum(), 1.0, 1e-12);
      EXPECT_GT(p.minCoeff(), 0.0);
    }
    EXPECT_TRUE((s.domain_probs.array() >= 0).all() && (s.domain_probs.array() <= 1).all());
  }
}

// Recomputes one candidate's logit with the single-item functions and the
// value-only encoder path, independently of the batched tape.
TEST(ScoreTurn, BatchedLogitsMatchSingleItemEquations) {
  Fixture f(9);
  const Turn turn = MakeTurn("what area would you like ?", "i want north please");
  TurnScores s = f.Score(f.ontology, turn);
  ParameterStore &store = f.model.params();
  const TrackerHeads &heads = f.model.heads();
  auto value = [&](int index) -> const Eigen::MatrixXd & { return store.at(index).value; };
  auto enc = [&](EncoderRole role, const std::vector<std::string> &tokens) {
    return f.model.encoders().Encode(store, role, tokens, f.table);
  };
  auto sim = [&](const TrackerHeads::Projection &p, const Eigen::VectorXd &h, const std::string &term) {
    return Similarity(h, TermEmbedding(f.table, term), value(p.w), value(p.b).col(0));
  };
  const auto &usr = turn.user_tokens, &sys = turn.system_tokens;

  for (int d = 0; d < f.ontology.num_domains(); ++d) {
    const std::string &name = f.ontology.domains()[d].name;
    double p = DomainProbability(sim(heads.domain_projection, enc(EncoderRole::kUserDomain, usr), name),
                                 sim(heads.domain_projection, enc(EncoderRole::kSystemDomain, sys), name),
                                 value(heads.domain_head.w).col(0), value(heads.domain_head.b)(0, 0));
    EXPECT_NEAR(s.domain_probs[d], p, 1e-12);
  }
  for (int slot = 0; slot < f.ontology.num_slots(); ++slot) {
    const std::string &slot_name = f.ontology.slot(slot).slot_name;
    Eigen::VectorXd s_usr = sim(heads.slot_projection, enc(EncoderRole::kUserSlot, usr), slot_name);
    Eigen::VectorXd s_sys = sim(heads.slot_projection, enc(EncoderRole::kSystemSlot, sys), slot_name);
    Eigen::VectorXd h_af = enc(EncoderRole::kUserAffirm, usr);
    const auto &candidates = f.ontology.Candidates(slot);
    for (size_t v = 0; v < candidates.size(); ++v) {
      Eigen::VectorXd v_usr = sim(heads.value_projection, enc(EncoderRole::kUserValue, usr), candidates[v]);
      Eigen::VectorXd v_sys = sim(heads.value_projection, enc(EncoderRole::kSystemValue, sys), candidates[v]);
      CaseScores c = ScoreCases(s_usr, s_sys, v_usr, v_sys, h_af, value(heads.inform_head.w).col(0),
                                value(heads.inform_head.b)(0, 0), value(heads.request_head.w).col(0),
                                value(heads.request_head.b)(0, 0), value(heads.affirm_head.w).col(0),
                                value(heads.affirm_head.b)(0, 0));
      EXPECT_NEAR(s.slot_logits[slot][static_cast<Eigen::Index>(v)], c.inform + c.request + c.affirm, 1e-10)
          << slot_name << "=" << candidates[v];
    }
  }
}

TEST(ScoreTurn, ValuePermutationEquivariance) {
  Fixture f(12);
  Ontology permuted({{"restaurant",
                      {{"food", {"italian", "turkish", "chinese"}}, {"area", {"south", "north"}}}},
                     {"hotel", {{"parking", {"paid", "free"}}}}});
  const Turn turn = MakeTurn("shall i go with chinese food ?", "yes please");
  TurnScores a = f.Score(f.ontology, turn), b = f.Score(permuted, turn);
  for (int s = 0; s < f.ontology.num_slots(); ++s) {
    const auto &names = f.ontology.Candidates(s);
    for (size_t v = 0; v < names.size(); ++v) {
      int w = permuted.CandidateIndex(s, names[v]);
      EXPECT_NEAR(a.slot_probs[s][static_cast<Eigen::Index>(v)], b.slot_probs[s][w], 1e-12);
    }
  }
  EXPECT_EQ(a.domain_probs, b.domain_probs);
}

TEST(TrackerParams, ShapesIndependentOfOntology) {
  Fixture small;
  BeliefTracker other(testing::TinyConfig().model);
  Ontology big = ParseOntology(R"({"a":{"x":["p","q","r"]},"b":{"y":[],"z":["s"]}})");
  // Score both ontologies; parameter layout must be untouched and identical.
  small.Score(big, MakeTurn("", "i want turkish food"));
  ASSERT_EQ(small.model.params().size(), other.params().size());
  for (size_t i = 0; i < other.params().size(); ++i) {
    const Parameter &a = small.model.params().at(static_cast<int>(i));
    const Parameter &b = other.params().at(static_cast<int>(i));
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.value.rows(), b.value.rows()) << a.name;
    EXPECT_EQ(a.value.cols(), b.value.cols()) << a.name;
  }
}

}  // namespace
}  // namespace mdbt
