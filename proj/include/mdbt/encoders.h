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

#ifndef MDBT_ENCODERS_H_
#define MDBT_ENCODERS_H_

#include <array>
#include <random>
#include <string>
#include <vector>

#include "mdbt/autodiff.h"
#include "mdbt/embeddings.h"
#include "mdbt/params.h"

namespace mdbt {

enum class EncoderKind { kBiLstm, kCnn };

std::string ToString(EncoderKind kind);
EncoderKind ParseEncoderKind(const std::string &text);

// The seven utterance encoders. None of them share weights.
enum class EncoderRole {
  kUserDomain,
  kUserSlot,
  kUserValue,
  kSystemDomain,
  kSystemSlot,
  kSystemValue,
  kUserAffirm,
};
inline constexpr int kNumEncoderRoles = 7;
std::string ToString(EncoderRole role);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kCnn;
  int embedding_dim = 300;  // D
  int hidden_dim = 64;      // L, even for the Bi-LSTM
  double dropout = 0.0;     // applied to encoder outputs in training mode
  std::vector<int> cnn_widths = {1, 2, 3};

  // Filters per kernel width: ceil(L / #widths), the last width trimmed so
  // the total is exactly L.
  std::vector<int> CnnFilterCounts() const;
  void Validate() const;
};

class EncoderBank {
 public:
  EncoderBank(const EncoderConfig &config, ParameterStore &store);

  const EncoderConfig &config() const { return config_; }

  // Encodes a D x T matrix of token embeddings into an L x 1 vector. An empty
  // sequence encodes to zeros. Dropout is applied only when rng is non-null.
  ad::Var Encode(const BoundParams &params, EncoderRole role, const ad::Matrix &embedded,
                 std::mt19937_64 *dropout_rng) const;

  // Value-only convenience wrapper (no dropout).
  Eigen::VectorXd Encode(ParameterStore &store, EncoderRole role,
                         const std::vector<std::string> &tokens,
                         const EmbeddingTable &table) const;

  // Number of Encode calls so far (instrumentation).
  long invocations() const { return invocations_; }

 private:
  struct LstmDirection {
    int w, u, b;
  };
  struct RoleParams {
    LstmDirection forward, backward;
    std::vector<std::pair<int, int>> conv;  // (weight, bias) per width
  };

  EncoderConfig config_;
  std::array<RoleParams, kNumEncoderRoles> roles_;
  mutable long invocations_ = 0;
};

// Inverted dropout: keeps each entry with probability 1 - rate and rescales
// by 1 / (1 - rate).
ad::Var Dropout(ad::Var x, double rate, std::mt19937_64 *rng);

}  // namespace mdbt

#endif  // MDBT_ENCODERS_H_
