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

#ifndef MDBT_TRAINING_H_
#define MDBT_TRAINING_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdbt/corpus.h"
#include "mdbt/embeddings.h"
#include "mdbt/evaluation.h"
#include "mdbt/model.h"
#include "mdbt/ontology.h"

namespace mdbt {

enum class InitScale {
  kUnit,   // every weight ~ Normal(0, 1)
  kFanIn,  // weight matrices ~ Normal(0, 1 / fan_in)
};
std::string ToString(InitScale scale);
InitScale ParseInitScale(const std::string &text);

struct TrainConfig {
  ModelConfig model;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 64;  // dialogues
  int epochs = 600;
  // Stop after this many epochs without a dev joint-accuracy improvement;
  // 0 disables early stopping.
  int patience = 0;
  uint64_t seed = 1;
  // Adds -(1 - t) log(1 - P) to the domain loss. Without it a sigmoid domain
  // output is never pushed down on negative labels.
  bool domain_loss_negatives = true;
  double loss_epsilon = 1e-12;
  InitScale init_scale = InitScale::kUnit;
  // Starts the slot update cell as an accumulator of turn logits: gamma = 1
  // for W_x and W_h, every other slot-cell scalar 0.
  bool slot_update_identity_init = false;

  void Validate() const;
  nlohmann::ordered_json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json &j);
};

// Weights ~ Normal(0, 1) (or 1 / fan_in), biases = 0, from config.seed.
BeliefTracker InitParams(const TrainConfig &config);

// A dialogue with its embedded turns and split labels, prepared once.
struct PreparedDialogue {
  std::string id;
  std::vector<EmbeddedTurn> turns;
  DialogueLabels labels;
};

std::vector<PreparedDialogue> Prepare(const std::vector<Dialogue> &dialogues,
                                      const Ontology &ontology, const EmbeddingTable &table);

// Domain loss, summed over dialogues, turns and domains; probabilities are
// clamped at eps inside the logarithm.
double LossDomain(const std::vector<DialogueBelief> &beliefs,
                  const std::vector<DialogueLabels> &labels, double eps = 1e-12,
                  bool with_negatives = true);

// Categorical cross-entropy of every slot distribution against its one-hot
// label, summed over dialogues, turns and slots.
double LossSlotValue(const std::vector<DialogueBelief> &beliefs,
                     const std::vector<DialogueLabels> &labels, double eps = 1e-12);

enum class Objective { kDomain, kSlotValue, kBoth };

struct LossValues {
  double domain = 0;
  double slot_value = 0;
};

// Adds d(objective)/d(theta) over `batch` into every Parameter::grad.
// dropout_seed < 0 disables dropout; otherwise each dialogue draws its masks
// from (dropout_seed, position in batch).
LossValues AccumulateGradients(BeliefTracker &model, const OntologyTerms &terms,
                               const std::vector<const PreparedDialogue *> &batch,
                               const TrainConfig &config, Objective objective,
                               int64_t dropout_seed);

// Loss values only (no dropout, no gradients).
LossValues ComputeLoss(BeliefTracker &model, const OntologyTerms &terms,
                       const std::vector<const PreparedDialogue *> &batch,
                       const TrainConfig &config);

class Adam {
 public:
  Adam(double learning_rate, double beta1, double beta2, double epsilon);
  // One update of every parameter in `group` from its accumulated gradient.
  void Step(ParameterStore &store, ParamGroup group);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::map<ParamGroup, long> steps_;
  std::vector<ad::Matrix> m_, v_;
};

MetricReport EvaluatePrepared(BeliefTracker &model, const Ontology &ontology,
                              const OntologyTerms &terms,
                              const std::vector<PreparedDialogue> &dialogues);

struct EpochLog {
  int epoch = 0;
  double domain_loss = 0;      // mean per training dialogue
  double slot_value_loss = 0;  // mean per training dialogue
  double dev_joint = 0;
  double dev_f1 = 0;

  std::string ToTsv() const;
};

struct TrainResult {
  BeliefTracker model;  // best-dev parameters (last epoch without a dev set)
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_dev_joint = -1;
};

TrainResult Train(const CorpusSplit &corpus, const Ontology &ontology, const EmbeddingTable &table,
                  const TrainConfig &config,
                  const std::function<void(const EpochLog &)> &on_epoch = {});

struct ParameterCount {
  size_t total = 0;
  std::map<std::string, size_t> by_module;
};

ParameterCount CountParameters(const BeliefTracker &model);

struct GradientCheckReport {
  double max_relative_error = 0;
  std::string worst_parameter;
  double worst_analytic = 0;
  double worst_numeric = 0;
  size_t scalars_checked = 0;
  // Every parameter swept, in store order, with its own max relative error.
  std::vector<std::pair<std::string, double>> parameters;
};

// Compares analytic d(L_d + L_sv)/d(theta) with central differences
// (L(theta + eps) - L(theta - eps)) / 2 eps for every trainable scalar.
// Relative error is |a - n| / max(|a|, |n|, floor). Requires dropout off.
GradientCheckReport GradientCheck(BeliefTracker &model, const OntologyTerms &terms,
                                  const std::vector<PreparedDialogue> &batch,
                                  const TrainConfig &config, double eps = 1e-5,
                                  double floor = 1e-4);

}  // namespace mdbt

#endif  // MDBT_TRAINING_H_
