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

#include "mdbt/training.h"

#include <gtest/gtest.h>

#include <algorithm>

#include <cmath>
#include <set>

#include "fixtures.h"
#include "mdbt/common.h"
#include "mdbt/synthetic.h"

namespace mdbt {
namespace {

using testing::SmallDialogue;
using testing::SmallOntology;
using testing::TinyConfig;

DialogueBelief OneTurnBelief(Eigen::VectorXd domains, std::vector<Eigen::VectorXd> slots) {
  TurnBelief t;
  t.domains = std::move(domains);
  t.slots = std::move(slots);
  return {{t}};
}

DialogueLabels OneTurnLabels(std::vector<int> active, std::vector<int> values) {
  DialogueLabels l;
  l.domains.active = {std::move(active)};
  l.slots.value = {std::move(values)};
  return l;
}

TEST(InitParams, DeterministicZeroBiasesUnitNormalWeights) {
  TrainConfig c = TinyConfig(EncoderKind::kBiLstm);
  c.model.embedding_dim = 100;
  c.model.hidden_dim = 64;
  BeliefTracker a = InitParams(c), b = InitParams(c);
  std::vector<double> weights;
  for (size_t i = 0; i < a.params().size(); ++i) {
    const Parameter &p = a.params().at(static_cast<int>(i));
    EXPECT_EQ(p.value, b.params().at(static_cast<int>(i)).value) << p.name;
    if (p.kind == ParamKind::kBias) {
      EXPECT_TRUE(p.value.isZero(0.0)) << p.name;
    }
  }
  const Parameter &big = a.params().at(a.params().IndexOf("encoder.usr_domain.fwd.W"));
  ASSERT_GE(big.value.size(), 10000);
  const double mean = big.value.mean();
  const double var = (big.value.array() - mean).square().sum() / (big.value.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var, 1.0, 0.1);
  c.seed = 2;
  EXPECT_NE(InitParams(c).params().at(0).value, a.params().at(0).value);
}

TEST(InitParams, FanInScalesWeightMatricesOnly) {
  TrainConfig c = TinyConfig(EncoderKind::kBiLstm);
  c.model.embedding_dim = 100;
  c.model.hidden_dim = 64;
  BeliefTracker unit = InitParams(c);
  c.init_scale = InitScale::kFanIn;
  BeliefTracker scaled = InitParams(c);
  const int w = scaled.params().IndexOf("encoder.usr_domain.fwd.W");
  const ad::Matrix &big = scaled.params().at(w).value;
  EXPECT_EQ(big, unit.params().at(w).value / std::sqrt(static_cast<double>(big.cols())));
  // Scalar update weights keep their unit scale.
  const int alpha = scaled.params().IndexOf("update.domain.Wh.alpha");
  EXPECT_EQ(scaled.params().at(alpha).value, unit.params().at(alpha).value);
}

TEST(InitParams, IdentitySlotUpdateStartsAsAnAccumulator) {
  TrainConfig c = TinyConfig();
  c.slot_update_identity_init = true;
  BeliefTracker model = InitParams(c);
  const ParameterStore &store = model.params();
  int seen = 0;
  for (size_t i = 0; i < store.size(); ++i) {
    const Parameter &p = store.at(static_cast<int>(i));
    if (p.name.rfind("update.slot.", 0) != 0) continue;
    ++seen;
    const bool one = p.name == "update.slot.Wx.gamma" || p.name == "update.slot.Wh.gamma";
    EXPECT_EQ(p.value(0, 0), one ? 1.0 : 0.0) << p.name;
  }
  EXPECT_EQ(seen, 11);
  c.model.slot_update = UpdateVariant::kLstm;
  EXPECT_THROW(InitParams(c), ValidationError);
}

TEST(LossDomain, ClosedForms) {
  // Perfect prediction.
  EXPECT_EQ(LossDomain({OneTurnBelief(Eigen::Vector2d(1, 0), {})}, {OneTurnLabels({1, 0}, {})}), 0.0);
  // t = 1, P = 0.5 gives ln 2; the negative term adds nothing here.
  EXPECT_NEAR(LossDomain({OneTurnBelief(Eigen::VectorXd::Constant(1, 0.5), {})}, {OneTurnLabels({1}, {})}),
              std::log(2.0), 1e-15);
  // P = 0 at a positive label is clamped.
  const double clamped =
      LossDomain({OneTurnBelief(Eigen::VectorXd::Zero(1), {})}, {OneTurnLabels({1}, {})}, 1e-12);
  EXPECT_TRUE(std::isfinite(clamped));
  EXPECT_NEAR(clamped, -std::log(1e-12), 1e-9);
  // The negative term: t = 0, P = 0.75 gives -ln 0.25, or 0 without it.
  EXPECT_NEAR(LossDomain({OneTurnBelief(Eigen::VectorXd::Constant(1, 0.75), {})}, {OneTurnLabels({0}, {})}),
              -std::log(0.25), 1e-15);
  EXPECT_EQ(LossDomain({OneTurnBelief(Eigen::VectorXd::Constant(1, 0.75), {})}, {OneTurnLabels({0}, {})},
                       1e-12, false),
            0.0);
}

TEST(LossSlotValue, ClosedForms) {
  Eigen::Vector4d uniform = Eigen::Vector4d::Constant(0.25), onehot(0, 0, 1, 0);
  EXPECT_EQ(LossSlotValue({OneTurnBelief({}, {onehot})}, {OneTurnLabels({}, {2})}), 0.0);
  EXPECT_NEAR(LossSlotValue({OneTurnBelief({}, {uniform})}, {OneTurnLabels({}, {1})}), std::log(4.0), 1e-15);
  EXPECT_NEAR(LossSlotValue({OneTurnBelief({}, {onehot, uniform})}, {OneTurnLabels({}, {2, 3})}),
              std::log(4.0), 1e-15);
}

struct Problem {
  Ontology ontology = SmallOntology();
  EmbeddingTable table = testing::RandomTable(10);
  OntologyTerms terms = OntologyTerms::Build(ontology, table);
  std::vector<PreparedDialogue> data;
  Problem() {
    Dialogue empty;
    empty.id = "no-goal";
    empty.turns.push_back(MakeTurn("", "hello"));
    empty.turns.push_back(MakeTurn("how can i help ?", "thank you"));
    data = Prepare({SmallDialogue(), empty}, ontology, table);
  }
  std::vector<const PreparedDialogue *> Batch(std::initializer_list<int> which) const {
    std::vector<const PreparedDialogue *> out;
    for (int i : which) out.push_back(&data[static_cast<size_t>(i)]);
    return out;
  }
};

double GradNorm(const ParameterStore &store, ParamGroup group) {
  double sum = 0;
  for (size_t i = 0; i < store.size(); ++i) {
    const Parameter &p = store.at(static_cast<int>(i));
    if (p.group == group) sum += p.grad.squaredNorm();
  }
  return std::sqrt(sum);
}

TEST(Disjointness, EachLossReachesOnlyItsGroup) {
  Problem pr;
  TrainConfig c = TinyConfig();
  BeliefTracker model = InitParams(c);
  model.params().ZeroGrad();
  AccumulateGradients(model, pr.terms, pr.Batch({0}), c, Objective::kDomain, -1);
  EXPECT_GT(GradNorm(model.params(), ParamGroup::kDomain), 0);
  EXPECT_EQ(GradNorm(model.params(), ParamGroup::kSlotValue), 0);
  model.params().ZeroGrad();
  AccumulateGradients(model, pr.terms, pr.Batch({0}), c, Objective::kSlotValue, -1);
  EXPECT_EQ(GradNorm(model.params(), ParamGroup::kDomain), 0);
  EXPECT_GT(GradNorm(model.params(), ParamGroup::kSlotValue), 0);
}

TEST(Disjointness, NoPositiveDomainLabelsGiveNoDomainHeadGradientWithoutNegatives) {
  Problem pr;
  TrainConfig c = TinyConfig();
  c.domain_loss_negatives = false;
  BeliefTracker model = InitParams(c);
  model.params().ZeroGrad();
  AccumulateGradients(model, pr.terms, pr.Batch({1}), c, Objective::kBoth, -1);
  for (const char *name : {"decision.domain.w", "decision.domain.b"}) {
    EXPECT_TRUE(model.params().at(model.params().IndexOf(name)).grad.isZero(0.0)) << name;
  }
  // With the complementary term the same batch does push the head down.
  c.domain_loss_negatives = true;
  model.params().ZeroGrad();
  AccumulateGradients(model, pr.terms, pr.Batch({1}), c, Objective::kBoth, -1);
  EXPECT_FALSE(model.params().at(model.params().IndexOf("decision.domain.w")).grad.isZero(0.0));
}

TEST(Loss, InvariantToDialogueOrderInBatch) {
  Problem pr;
  TrainConfig c = TinyConfig();
  BeliefTracker model = InitParams(c);
  LossValues a = ComputeLoss(model, pr.terms, pr.Batch({0, 1}), c);
  LossValues b = ComputeLoss(model, pr.terms, pr.Batch({1, 0}), c);
  EXPECT_NEAR(a.domain, b.domain, 1e-12);
  EXPECT_NEAR(a.slot_value, b.slot_value, 1e-12);
  model.params().ZeroGrad();
  AccumulateGradients(model, pr.terms, pr.Batch({0, 1}), c, Objective::kBoth, -1);
  std::vector<ad::Matrix> first;
  for (size_t i = 0; i < model.params().size(); ++i) first.push_back(model.params().at(static_cast<int>(i)).grad);
  model.params().ZeroGrad();
  AccumulateGradients(model, pr.terms, pr.Batch({1, 0}), c, Objective::kBoth, -1);
  for (size_t i = 0; i < model.params().size(); ++i) {
    EXPECT_LT((first[i] - model.params().at(static_cast<int>(i)).grad).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Loss, NonFiniteLossNamesTheDialogue) {
  Problem pr;
  TrainConfig c = TinyConfig();
  BeliefTracker model = InitParams(c);
  model.params().at(model.params().IndexOf("decision.inform.b")).value(0, 0) = std::nan("");
  try {
    AccumulateGradients(model, pr.terms, pr.Batch({0}), c, Objective::kBoth, -1);
    FAIL();
  } catch (const RuntimeError &e) {
    EXPECT_NE(std::string(e.what()).find("small"), std::string::npos) << e.what();
  }
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradient) {
  ParameterStore store;
  int a = store.Add("a", 1, 2, ParamKind::kWeight, ParamGroup::kDomain);
  int b = store.Add("b", 1, 1, ParamKind::kWeight, ParamGroup::kSlotValue);
  store.at(a).grad << 3.0, -0.5;
  store.at(b).grad << 2.0;
  Adam adam(0.01, 0.9, 0.999, 1e-8);
  adam.Step(store, ParamGroup::kDomain);
  // Bias-corrected first step: m_hat = g, v_hat = g^2, so the step is
  // lr * g / (|g| + eps).
  EXPECT_NEAR(store.at(a).value(0, 0), -0.01 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(store.at(a).value(0, 1), 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(store.at(b).value(0, 0), 0.0);
}

TEST(Training, ConstrainedMatricesKeepTheirStructure) {
  Problem pr;
  TrainConfig c = TinyConfig();
  c.learning_rate = 0.05;
  BeliefTracker model = InitParams(c);
  Adam adam(c.learning_rate, c.adam_beta1, c.adam_beta2, c.adam_epsilon);
  for (int step = 0; step < 20; ++step) {
    model.params().ZeroGrad();
    AccumulateGradients(model, pr.terms, pr.Batch({0, 1}), c, Objective::kBoth, -1);
    adam.Step(model.params(), ParamGroup::kDomain);
    adam.Step(model.params(), ParamGroup::kSlotValue);
  }
  for (const UpdateCell *cell : {&model.update().domain_cell(), &model.update().slot_cell()}) {
    for (const auto &[name, m] : cell->Matrices(model.params())) {
      Eigen::MatrixXd dense = m.Materialize(4);
      std::set<double> diagonal, off;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) (i == j ? diagonal : off).insert(dense(i, j));
      }
      EXPECT_EQ(diagonal.size(), 1u) << name;
      EXPECT_EQ(off.size(), 1u) << name;
      if (m.form == MatrixForm::kScalarDiagonal) {
        EXPECT_EQ(*off.begin(), 0.0) << name;
      }
    }
  }
}

TEST(Training, OverfitsOneDialogue) {
  TrainConfig c = TinyConfig();
  c.epochs = 50;
  c.batch_size = 1;
  c.learning_rate = 0.03;
  CorpusSplit corpus;
  corpus.train.push_back(SmallDialogue());
  TrainResult r = Train(corpus, SmallOntology(), testing::RandomTable(10), c);
  ASSERT_EQ(r.log.size(), 50u);
  auto total = [&](int epoch) { return r.log[epoch].domain_loss + r.log[epoch].slot_value_loss; };
  for (int e = 1; e < 10; ++e) EXPECT_LT(total(e), total(e - 1)) << "epoch " << e + 1;
  EXPECT_LT(total(49), 0.1);
}

TEST(Training, SameSeedSameCurve) {
  SyntheticSpec spec;
  spec.num_domains = 2;
  spec.slots_per_domain = 2;
  spec.values_per_slot = 3;
  spec.train_dialogues = 12;
  spec.dev_dialogues = 4;
  spec.test_dialogues = 0;
  SyntheticCorpus data = GenerateSynthetic(spec, 2);
  EmbeddingTable table = SyntheticEmbeddings(data, 10, 2);
  TrainConfig c = TinyConfig();
  c.model.dropout = 0.5;
  c.epochs = 3;
  c.batch_size = 4;
  auto run = [&] {
    std::string log;
    for (const auto &e : Train(data.corpus, data.ontology, table, c).log) log += e.ToTsv() + "\n";
    return log;
  };
  const std::string first = run();
  EXPECT_EQ(first, run());
  c.seed = 9;
  EXPECT_NE(first, run());
}

TEST(Training, EmptyTrainSplitIsAnError) {
  EXPECT_THROW(Train(CorpusSplit{}, SmallOntology(), testing::RandomTable(10), TinyConfig()), ValidationError);
  CorpusSplit corpus;
  corpus.train.push_back(SmallDialogue());
  EXPECT_THROW(Train(corpus, SmallOntology(), testing::RandomTable(12), TinyConfig()), ValidationError);
}

// Closed-form count for the CNN / memory-rnn configuration.
size_t ExpectedCnnMemoryCount(int D, int L) {
  EncoderConfig e;
  e.embedding_dim = D;
  e.hidden_dim = L;
  size_t encoder = 0;
  auto counts = e.CnnFilterCounts();
  for (size_t i = 0; i < counts.size(); ++i) {
    encoder += static_cast<size_t>(counts[i]) * (e.cnn_widths[i] * D + 1);
  }
  const size_t projections = 3 * static_cast<size_t>(L * D + L);
  const size_t heads = 3 * (2 * L + 1) + (3 * L + 1);
  const size_t update = (5 + 1) + (5 * 2 + 1);
  return 7 * encoder + projections + heads + update;
}

TEST(CountParameters, ClosedFormAndOntologyIndependence) {
  TrainConfig c = TinyConfig();
  ParameterCount count = CountParameters(InitParams(c));
  EXPECT_EQ(count.total, ExpectedCnnMemoryCount(10, 8));
  size_t sum = 0;
  for (const auto &[module, n] : count.by_module) sum += n;
  EXPECT_EQ(sum, count.total);
  EXPECT_EQ(count.by_module.size(), 4u);  // encoder, similarity, decision, update

  c.model.hidden_dim = 16;
  EXPECT_NE(CountParameters(InitParams(c)).total, count.total);
  EXPECT_EQ(CountParameters(InitParams(c)).total, ExpectedCnnMemoryCount(10, 16));
}

TEST(TrainConfig, JsonRoundTripAndValidation) {
  TrainConfig c = TinyConfig(EncoderKind::kBiLstm, UpdateVariant::kLstm);
  c.model.mode = BeliefMode::kPassThrough;
  c.learning_rate = 0.0025;
  c.seed = 77;
  c.patience = 4;
  c.init_scale = InitScale::kFanIn;
  c.model.similarity_dropout = false;
  TrainConfig back = TrainConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson().dump(), c.ToJson().dump());
  auto bad = c.ToJson();
  bad["encoder"] = "transformer";
  EXPECT_THROW(TrainConfig::FromJson(bad), ValidationError);
  c.learning_rate = -1;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = TinyConfig();
  c.model.dropout = 1.0;
  EXPECT_THROW(c.Validate(), ValidationError);
}

class GradientCheckTest : public ::testing::TestWithParam<std::tuple<EncoderKind, UpdateVariant>> {};

TEST_P(GradientCheckTest, TinyProblemAgreesWithFiniteDifferences) {
  SyntheticSpec spec;
  spec.num_domains = 1;
  spec.slots_per_domain = 2;
  spec.values_per_slot = 2;
  spec.train_dialogues = 1;
  spec.dev_dialogues = spec.test_dialogues = 0;
  spec.min_turns = spec.max_turns = 2;
  spec.filler_probability = 0;
  SyntheticCorpus data = GenerateSynthetic(spec, 1);
  TrainConfig c = TinyConfig(std::get<0>(GetParam()), std::get<1>(GetParam()));
  EmbeddingTable table = SyntheticEmbeddings(data, c.model.embedding_dim, 1);
  BeliefTracker model = InitParams(c);
  OntologyTerms terms = OntologyTerms::Build(data.ontology, table);
  GradientCheckReport r = GradientCheck(model, terms, Prepare(data.corpus.train, data.ontology, table), c);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << " analytic " << r.worst_analytic
                                        << " numeric " << r.worst_numeric;
  EXPECT_EQ(r.scalars_checked, CountParameters(model).total);
  std::set<std::string> names;
  for (const auto &[name, err] : r.parameters) names.insert(name);
  const bool lstm = std::get<1>(GetParam()) == UpdateVariant::kLstm;
  for (const char *n : {"update.domain.Wx.alpha", "update.slot.Wx.gamma", "update.slot.Wx.lambda"}) {
    std::string name = n;
    if (lstm) name.insert(name.find(".W"), ".input");
    EXPECT_TRUE(names.count(name)) << name;
  }
  for (const auto &name : names) EXPECT_EQ(name.find("embedding"), std::string::npos) << name;
}

INSTANTIATE_TEST_SUITE_P(
    Configs, GradientCheckTest,
    ::testing::Values(std::make_tuple(EncoderKind::kCnn, UpdateVariant::kMemoryRnn),
                      std::make_tuple(EncoderKind::kBiLstm, UpdateVariant::kMemoryRnn),
                      std::make_tuple(EncoderKind::kCnn, UpdateVariant::kPlainRnn),
                      std::make_tuple(EncoderKind::kCnn, UpdateVariant::kLstm)),
    [](const auto &info) {
      std::string name = ToString(std::get<0>(info.param)) + "_" + ToString(std::get<1>(info.param));
      std::replace(name.begin(), name.end(), '-', '_');
      return name;
    });

TEST(GradientCheck, RefusesDropout) {
  Problem pr;
  TrainConfig c = TinyConfig();
  c.model.dropout = 0.5;
  BeliefTracker model = InitParams(c);
  EXPECT_THROW(GradientCheck(model, pr.terms, pr.data, c), ValidationError);
}

}  // namespace
}  // namespace mdbt
