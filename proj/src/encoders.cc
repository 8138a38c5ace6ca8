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

#include "mdbt/common.h"

namespace mdbt {

std::string ToString(EncoderKind kind) { return kind == EncoderKind::kBiLstm ? "bilstm" : "cnn"; }

EncoderKind ParseEncoderKind(const std::string &text) {
  if (text == "bilstm") return EncoderKind::kBiLstm;
  if (text == "cnn") return EncoderKind::kCnn;
  throw ValidationError("unknown encoder kind '" + text + "' (expected bilstm or cnn)");
}

std::string ToString(EncoderRole role) {
  switch (role) {
    case EncoderRole::kUserDomain: return "usr_domain";
    case EncoderRole::kUserSlot: return "usr_slot";
    case EncoderRole::kUserValue: return "usr_value";
    case EncoderRole::kSystemDomain: return "sys_domain";
    case EncoderRole::kSystemSlot: return "sys_slot";
    case EncoderRole::kSystemValue: return "sys_value";
    case EncoderRole::kUserAffirm: return "usr_affirm";
  }
  return "?";
}

std::vector<int> EncoderConfig::CnnFilterCounts() const {
  const int n = static_cast<int>(cnn_widths.size());
  const int per = (hidden_dim + n - 1) / n;
  std::vector<int> counts;
  int remaining = hidden_dim;
  for (int i = 0; i < n; ++i) {
    int c = std::min(per, remaining);
    counts.push_back(c);
    remaining -= c;
  }
  return counts;
}

void EncoderConfig::Validate() const {
  if (embedding_dim <= 0) throw ValidationError("embedding dimension must be positive");
  if (hidden_dim <= 0) throw ValidationError("hidden dimension must be positive");
  if (kind == EncoderKind::kBiLstm && hidden_dim % 2 != 0) {
    throw ValidationError("bilstm hidden dimension must be even");
  }
  if (dropout < 0 || dropout >= 1) throw ValidationError("dropout must be in [0, 1)");
  if (cnn_widths.empty()) throw ValidationError("cnn needs at least one kernel width");
  for (int w : cnn_widths) {
    if (w < 1) throw ValidationError("cnn kernel widths must be positive");
  }
}

EncoderBank::EncoderBank(const EncoderConfig &config, ParameterStore &store) : config_(config) {
  config_.Validate();
  const int D = config_.embedding_dim, L = config_.hidden_dim;
  for (int r = 0; r < kNumEncoderRoles; ++r) {
    auto role = static_cast<EncoderRole>(r);
    auto group = (role == EncoderRole::kUserDomain || role == EncoderRole::kSystemDomain)
                     ? ParamGroup::kDomain
                     : ParamGroup::kSlotValue;
    const std::string prefix = "encoder." + ToString(role) + ".";
    RoleParams &rp = roles_[r];
    if (config_.kind == EncoderKind::kBiLstm) {
      const int H = L / 2;
      auto direction = [&](const std::string &dir) {
        return LstmDirection{
            store.Add(prefix + dir + ".W", 4 * H, D, ParamKind::kWeight, group),
            store.Add(prefix + dir + ".U", 4 * H, H, ParamKind::kWeight, group),
            store.Add(prefix + dir + ".b", 4 * H, 1, ParamKind::kBias, group)};
      };
      rp.forward = direction("fwd");
      rp.backward = direction("bwd");
    } else {
      auto counts = config_.CnnFilterCounts();
      for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        const int width = config_.cnn_widths[i];
        const std::string name = prefix + "conv" + std::to_string(width);
        rp.conv.emplace_back(
            store.Add(name + ".W", counts[i], width * D, ParamKind::kWeight, group),
            store.Add(name + ".b", counts[i], 1, ParamKind::kBias, group));
      }
    }
  }
}

ad::Var Dropout(ad::Var x, double rate, std::mt19937_64 *rng) {
  if (rng == nullptr || rate <= 0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  ad::Matrix mask(x.rows(), x.cols());
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = keep(*rng) ? scale : 0.0;
  return ad::MulConst(x, mask);
}

ad::Var EncoderBank::Encode(const BoundParams &params, EncoderRole role,
                            const ad::Matrix &embedded, std::mt19937_64 *dropout_rng) const {
  ++invocations_;
  const RoleParams &rp = roles_[static_cast<int>(role)];
  ad::Tape &tape = *params[0].tape();
  if (embedded.cols() == 0) {
    return tape.Constant(ad::Matrix::Zero(config_.hidden_dim, 1));
  }
  ad::Var out;
  if (config_.kind == EncoderKind::kBiLstm) {
    ad::Var fwd = ad::LstmFinalState(embedded, params[rp.forward.w], params[rp.forward.u],
                                     params[rp.forward.b], /*reverse=*/false);
    ad::Var bwd = ad::LstmFinalState(embedded, params[rp.backward.w], params[rp.backward.u],
                                     params[rp.backward.b], /*reverse=*/true);
    out = ad::ConcatRows({fwd, bwd});
  } else {
    std::vector<ad::Var> pooled;
    for (auto [w, b] : rp.conv) {
      const int width = static_cast<int>(params[w].cols() / config_.embedding_dim);
      pooled.push_back(ad::ConvReluMaxPool(embedded, params[w], params[b], width));
    }
    out = pooled.size() == 1 ? pooled[0] : ad::ConcatRows(pooled);
  }
  return Dropout(out, config_.dropout, dropout_rng);
}

Eigen::VectorXd EncoderBank::Encode(ParameterStore &store, EncoderRole role,
                                    const std::vector<std::string> &tokens,
                                    const EmbeddingTable &table) const {
  ad::Tape tape(/*record=*/false);
  BoundParams params(tape, store, /*trainable=*/false);
  return Encode(params, role, table.EmbedSequence(tokens), nullptr).value().col(0);
}

}  // namespace mdbt
