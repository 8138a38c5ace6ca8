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

#include "mdbt/encoders.h"

#include <gtest/gtest.h>

#include "fixtures.h"
#include "mdbt/common.h"

namespace mdbt {
namespace {

struct Bank {
  ParameterStore store;
  EncoderBank bank;
  Bank(EncoderKind kind, int D, int L, uint64_t seed = 3)
      : bank(EncoderConfig{kind, D, L, 0.0, {1, 2, 3}}, store) {
    store.Initialize(seed);
  }
};

std::vector<std::string> Tokens(int n) {
  static const char *words[] = {"i", "want", "turkish", "food", "please", "north"};
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(words[i % 6]);
  return out;
}

class EncoderKinds : public ::testing::TestWithParam<EncoderKind> {};

TEST_P(EncoderKinds, OutputLengthIsLForAnyInputLength) {
  Bank b(GetParam(), 10, 8);
  EmbeddingTable table = testing::RandomTable(10);
  for (int n : {1, 5, 50}) {
    Eigen::VectorXd h = b.bank.Encode(b.store, EncoderRole::kUserSlot, Tokens(n), table);
    EXPECT_EQ(h.size(), 8) << n;
    EXPECT_TRUE(h.allFinite()) << n;
  }
}

TEST_P(EncoderKinds, EmptySequenceIsZero) {
  Bank b(GetParam(), 10, 8);
  EmbeddingTable table = testing::RandomTable(10);
  EXPECT_EQ(b.bank.Encode(b.store, EncoderRole::kSystemDomain, {}, table), Eigen::VectorXd::Zero(8));
}

TEST_P(EncoderKinds, DeterministicWithoutDropout) {
  Bank b(GetParam(), 10, 8);
  EmbeddingTable table = testing::RandomTable(10);
  auto first = b.bank.Encode(b.store, EncoderRole::kUserValue, Tokens(4), table);
  EXPECT_EQ(first, b.bank.Encode(b.store, EncoderRole::kUserValue, Tokens(4), table));
}

TEST_P(EncoderKinds, RolesAreIndependent) {
  Bank b(GetParam(), 10, 8);
  EmbeddingTable table = testing::RandomTable(10);
  std::vector<Eigen::VectorXd> outs;
  for (int r = 0; r < kNumEncoderRoles; ++r) {
    outs.push_back(b.bank.Encode(b.store, static_cast<EncoderRole>(r), Tokens(4), table));
  }
  for (size_t i = 0; i < outs.size(); ++i) {
    for (size_t j = i + 1; j < outs.size(); ++j) EXPECT_NE(outs[i], outs[j]) << i << " " << j;
  }
}

// Central differences of sum(outputs) against the tape gradient for every
// encoder weight of one role.
TEST_P(EncoderKinds, GradientMatchesFiniteDifferences) {
  Bank b(GetParam(), 4, 6, 11);
  for (size_t i = 0; i < b.store.size(); ++i) b.store.at(static_cast<int>(i)).value *= 0.5;
  EmbeddingTable table = testing::RandomTable(4);
  const ad::Matrix x = table.EmbedSequence(Tokens(3));
  auto probe = [&]() {
    ad::Tape tape(false);
    BoundParams p(tape, b.store, false);
    return b.bank.Encode(p, EncoderRole::kUserAffirm, x, nullptr).value().sum();
  };
  b.store.ZeroGrad();
  {
    ad::Tape tape;
    BoundParams p(tape, b.store, true);
    ad::Var h = b.bank.Encode(p, EncoderRole::kUserAffirm, x, nullptr);
    tape.Backward(ad::MatMul(tape.Constant(ad::Matrix::Ones(1, h.rows())), h));
  }
  int checked = 0;
  for (size_t i = 0; i < b.store.size(); ++i) {
    Parameter &param = b.store.at(static_cast<int>(i));
    for (Eigen::Index k = 0; k < param.value.size(); ++k) {
      const double keep = param.value(k), eps = 1e-6;
      param.value(k) = keep + eps;
      const double up = probe();
      param.value(k) = keep - eps;
      const double down = probe();
      param.value(k) = keep;
      const double numeric = (up - down) / (2 * eps), analytic = param.grad(k);
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
      EXPECT_LT(std::abs(numeric - analytic) / denom, 1e-4) << param.name << "[" << k << "]";
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

INSTANTIATE_TEST_SUITE_P(Kinds, EncoderKinds,
                         ::testing::Values(EncoderKind::kBiLstm, EncoderKind::kCnn),
                         [](const auto &info) { return ToString(info.param) == "bilstm" ? std::string("BiLstm") : std::string("Cnn"); });

TEST(BiLstm, ZeroWeightsGiveZeroOutput) {
  Bank b(EncoderKind::kBiLstm, 10, 8);
  for (size_t i = 0; i < b.store.size(); ++i) b.store.at(static_cast<int>(i)).value.setZero();
  EmbeddingTable table = testing::RandomTable(10);
  // Gates are sigmoid(0) = 0.5 and the candidate tanh(0) = 0, so the cell and
  // hidden states stay at zero on every step.
  EXPECT_EQ(b.bank.Encode(b.store, EncoderRole::kUserDomain, Tokens(5), table),
            Eigen::VectorXd::Zero(8));
}

TEST(BiLstm, OddHiddenSizeRejected) {
  ParameterStore store;
  EXPECT_THROW(EncoderBank(EncoderConfig{EncoderKind::kBiLstm, 10, 7, 0.0, {1, 2, 3}}, store),
               ValidationError);
}

TEST(Cnn, FilterCountsSumToL) {
  EncoderConfig c;
  c.hidden_dim = 64;
  EXPECT_EQ(c.CnnFilterCounts(), (std::vector<int>{22, 22, 20}));
  c.hidden_dim = 8;
  EXPECT_EQ(c.CnnFilterCounts(), (std::vector<int>{3, 3, 2}));
  c.hidden_dim = 7;
  EXPECT_EQ(c.CnnFilterCounts(), (std::vector<int>{3, 3, 1}));
}

TEST(Cnn, SingleTokenIsFiniteAndMatchesPaddedInput) {
  Bank b(EncoderKind::kCnn, 10, 9);
  EmbeddingTable table = testing::RandomTable(10);
  ad::Matrix one = table.EmbedSequence({"turkish"});
  ad::Matrix padded = ad::Matrix::Zero(10, 3);
  padded.col(0) = one.col(0);
  ad::Tape tape(false);
  BoundParams p(tape, b.store, false);
  ad::Var a = b.bank.Encode(p, EncoderRole::kUserValue, one, nullptr);
  ad::Var c = b.bank.Encode(p, EncoderRole::kUserValue, padded, nullptr);
  EXPECT_TRUE(a.value().allFinite());
  // Width-3 features see the same single window; narrower widths only add
  // windows over zero columns, which score relu(b) = 0 with zero biases.
  EXPECT_EQ(a.value(), c.value());
}

TEST(Dropout, ScalesKeptUnitsAndCountsInvocations) {
  ad::Tape tape(false);
  ad::Var x = tape.Constant(ad::Matrix::Ones(1000, 1));
  std::mt19937_64 rng(1);
  ad::Var y = Dropout(x, 0.5, &rng);
  int kept = 0;
  for (Eigen::Index i = 0; i < 1000; ++i) {
    ASSERT_TRUE(y.value()(i) == 0.0 || y.value()(i) == 2.0);
    kept += y.value()(i) != 0;
  }
  EXPECT_NEAR(kept, 500, 60);
  EXPECT_EQ(Dropout(x, 0.5, nullptr).value(), x.value());

  Bank b(EncoderKind::kCnn, 10, 8);
  EmbeddingTable table = testing::RandomTable(10);
  const long before = b.bank.invocations();
  b.bank.Encode(b.store, EncoderRole::kUserValue, Tokens(2), table);
  EXPECT_EQ(b.bank.invocations(), before + 1);
}

}  // namespace
}  // namespace mdbt
