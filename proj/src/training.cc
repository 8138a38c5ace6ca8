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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mdbt/common.h"

namespace mdbt {

std::string ToString(InitScale scale) { return scale == InitScale::kUnit ? "unit" : "fan-in"; }

InitScale ParseInitScale(const std::string &text) {
  if (text == "unit") return InitScale::kUnit;
  if (text == "fan-in") return InitScale::kFanIn;
  throw ValidationError("unknown init scale '" + text + "' (expected unit or fan-in)");
}

void TrainConfig::Validate() const {
  if (learning_rate <= 0) throw ValidationError("learning rate must be positive");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (patience < 0) throw ValidationError("patience must be >= 0");
  if (!(loss_epsilon > 0 && loss_epsilon < 1)) throw ValidationError("loss epsilon must be in (0, 1)");
  if (model.dropout < 0 || model.dropout >= 1) throw ValidationError("dropout must be in [0, 1)");
  if (model.embedding_dim < 1 || model.hidden_dim < 1) {
    throw ValidationError("embedding and hidden dimensions must be positive");
  }
  if (model.encoder == EncoderKind::kBiLstm && model.hidden_dim % 2 != 0) {
    throw ValidationError("bilstm hidden dimension must be even");
  }
  if (slot_update_identity_init && model.slot_update == UpdateVariant::kLstm) {
    throw ValidationError("identity slot-update init needs a plain-rnn or memory-rnn slot cell");
  }
}

nlohmann::ordered_json TrainConfig::ToJson() const {
  return {{"encoder", ToString(model.encoder)},
          {"embedding_dim", model.embedding_dim},
          {"hidden_dim", model.hidden_dim},
          {"domain_update", ToString(model.domain_update)},
          {"slot_update", ToString(model.slot_update)},
          {"belief_mode", ToString(model.mode)},
          {"dropout", model.dropout},
          {"learning_rate", learning_rate},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_epsilon", adam_epsilon},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"patience", patience},
          {"seed", seed},
          {"domain_loss_negatives", domain_loss_negatives},
          {"loss_epsilon", loss_epsilon},
          {"init_scale", ToString(init_scale)},
          {"slot_update_identity_init", slot_update_identity_init},
          {"similarity_dropout", model.similarity_dropout}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json &j) {
  TrainConfig c;
  try {
    c.model.encoder = ParseEncoderKind(j.at("encoder").get<std::string>());
    c.model.embedding_dim = j.at("embedding_dim").get<int>();
    c.model.hidden_dim = j.at("hidden_dim").get<int>();
    c.model.domain_update = ParseUpdateVariant(j.at("domain_update").get<std::string>());
    c.model.slot_update = ParseUpdateVariant(j.at("slot_update").get<std::string>());
    c.model.mode = ParseBeliefMode(j.at("belief_mode").get<std::string>());
    c.model.dropout = j.at("dropout").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.domain_loss_negatives = j.at("domain_loss_negatives").get<bool>();
    c.loss_epsilon = j.at("loss_epsilon").get<double>();
    c.init_scale = ParseInitScale(j.at("init_scale").get<std::string>());
    c.slot_update_identity_init = j.at("slot_update_identity_init").get<bool>();
    c.model.similarity_dropout = j.at("similarity_dropout").get<bool>();
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  c.Validate();
  return c;
}

BeliefTracker InitParams(const TrainConfig &config) {
  config.Validate();
  BeliefTracker model(config.model);
  ParameterStore &store = model.params();
  store.Initialize(config.seed);
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter &p = store.at(static_cast<int>(i));
    if (config.init_scale == InitScale::kFanIn && p.kind == ParamKind::kWeight &&
        p.value.size() > 1) {
      // Columns are inputs for matrices; a vector head reads all its rows.
      const auto fan_in = p.value.cols() > 1 ? p.value.cols() : p.value.rows();
      p.value /= std::sqrt(static_cast<double>(fan_in));
    }
    if (config.slot_update_identity_init && p.name.rfind("update.slot.", 0) == 0) {
      const bool keep = p.name == "update.slot.Wx.gamma" || p.name == "update.slot.Wh.gamma";
      p.value.setConstant(keep ? 1.0 : 0.0);
    }
  }
  return model;
}

std::vector<PreparedDialogue> Prepare(const std::vector<Dialogue> &dialogues,
                                      const Ontology &ontology, const EmbeddingTable &table) {
  std::vector<PreparedDialogue> out;
  out.reserve(dialogues.size());
  for (const auto &d : dialogues) {
    out.push_back({d.id, EmbedDialogue(d, table), SplitLabels(d, ontology)});
  }
  return out;
}

namespace {

void CheckAligned(const std::vector<DialogueBelief> &beliefs,
                  const std::vector<DialogueLabels> &labels) {
  if (beliefs.size() != labels.size()) throw ValidationError("loss: dialogue count mismatch");
  for (size_t n = 0; n < beliefs.size(); ++n) {
    if (beliefs[n].turns.size() != labels[n].slots.value.size()) {
      throw ValidationError("loss: turn count mismatch in dialogue " + std::to_string(n));
    }
  }
}

ad::Matrix DomainTargets(const DialogueLabels &labels, size_t turn) {
  const auto &active = labels.domains.active[turn];
  ad::Matrix t(1, static_cast<Eigen::Index>(active.size()));
  for (size_t d = 0; d < active.size(); ++d) t(0, static_cast<Eigen::Index>(d)) = active[d];
  return t;
}

struct DialogueLossVars {
  ad::Var domain;
  ad::Var slot_value;
};

DialogueLossVars BuildLoss(const BeliefTracker &model, const BoundParams &params,
                           const OntologyTerms &terms, const PreparedDialogue &dialogue,
                           const TrainConfig &config, std::mt19937_64 *dropout_rng) {
  auto outputs = model.Forward(params, terms, dialogue.turns, dropout_rng);
  std::vector<ad::Var> domain_terms, slot_terms;
  for (size_t t = 0; t < outputs.size(); ++t) {
    domain_terms.push_back(ad::BinaryCrossEntropy(outputs[t].domain_probs,
                                                  DomainTargets(dialogue.labels, t),
                                                  config.loss_epsilon,
                                                  config.domain_loss_negatives));
    slot_terms.push_back(ad::SegmentNll(outputs[t].slot_probs, terms.segments,
                                        dialogue.labels.slots.value[t], config.loss_epsilon));
  }
  return {ad::Sum(domain_terms), ad::Sum(slot_terms)};
}

}  // namespace

double LossDomain(const std::vector<DialogueBelief> &beliefs,
                  const std::vector<DialogueLabels> &labels, double eps, bool with_negatives) {
  CheckAligned(beliefs, labels);
  double loss = 0;
  for (size_t n = 0; n < beliefs.size(); ++n) {
    for (size_t t = 0; t < beliefs[n].turns.size(); ++t) {
      const auto &p = beliefs[n].turns[t].domains;
      const auto &target = labels[n].domains.active[t];
      for (Eigen::Index d = 0; d < p.size(); ++d) {
        if (target[d]) {
          loss -= std::log(std::max(p[d], eps));
        } else if (with_negatives) {
          loss -= std::log(std::max(1 - p[d], eps));
        }
      }
    }
  }
  return loss;
}

double LossSlotValue(const std::vector<DialogueBelief> &beliefs,
                     const std::vector<DialogueLabels> &labels, double eps) {
  CheckAligned(beliefs, labels);
  double loss = 0;
  for (size_t n = 0; n < beliefs.size(); ++n) {
    for (size_t t = 0; t < beliefs[n].turns.size(); ++t) {
      const auto &slots = beliefs[n].turns[t].slots;
      for (size_t s = 0; s < slots.size(); ++s) {
        loss -= std::log(std::max(slots[s][labels[n].slots.value[t][s]], eps));
      }
    }
  }
  return loss;
}

LossValues AccumulateGradients(BeliefTracker &model, const OntologyTerms &terms,
                               const std::vector<const PreparedDialogue *> &batch,
                               const TrainConfig &config, Objective objective,
                               int64_t dropout_seed) {
  LossValues total;
  for (size_t i = 0; i < batch.size(); ++i) {
    const PreparedDialogue &dialogue = *batch[i];
    std::mt19937_64 rng;
    if (dropout_seed >= 0) {
      std::seed_seq seq{static_cast<uint64_t>(dropout_seed), static_cast<uint64_t>(i)};
      rng.seed(seq);
    }
    ad::Tape tape;
    BoundParams params(tape, model.params(), /*trainable=*/true);
    auto loss = BuildLoss(model, params, terms, dialogue, config,
                          dropout_seed >= 0 ? &rng : nullptr);
    const double ld = loss.domain.scalar(), lsv = loss.slot_value.scalar();
    if (!std::isfinite(ld) || !std::isfinite(lsv)) {
      std::ostringstream msg;
      msg << "non-finite loss on dialogue '" << dialogue.id << "' (L_d=" << ld << ", L_sv=" << lsv
          << ", turns=" << dialogue.turns.size() << ")";
      throw RuntimeError(msg.str());
    }
    total.domain += ld;
    total.slot_value += lsv;
    switch (objective) {
      case Objective::kDomain: tape.Backward(loss.domain); break;
      case Objective::kSlotValue: tape.Backward(loss.slot_value); break;
      case Objective::kBoth: tape.Backward(ad::Add(loss.domain, loss.slot_value)); break;
    }
  }
  return total;
}

LossValues ComputeLoss(BeliefTracker &model, const OntologyTerms &terms,
                       const std::vector<const PreparedDialogue *> &batch,
                       const TrainConfig &config) {
  LossValues total;
  for (const PreparedDialogue *dialogue : batch) {
    ad::Tape tape(/*record=*/false);
    BoundParams params(tape, model.params(), /*trainable=*/false);
    auto loss = BuildLoss(model, params, terms, *dialogue, config, nullptr);
    total.domain += loss.domain.scalar();
    total.slot_value += loss.slot_value.scalar();
  }
  return total;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void Adam::Step(ParameterStore &store, ParamGroup group) {
  if (m_.size() != store.size()) {
    m_.clear();
    v_.clear();
    for (size_t i = 0; i < store.size(); ++i) {
      const auto &p = store.at(static_cast<int>(i)).value;
      m_.push_back(ad::Matrix::Zero(p.rows(), p.cols()));
      v_.push_back(ad::Matrix::Zero(p.rows(), p.cols()));
    }
  }
  const long t = ++steps_[group];
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter &p = store.at(static_cast<int>(i));
    if (p.group != group) continue;
    m_[i] = beta1_ * m_[i] + (1 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr_ * (m_[i].array() / correction1) /
                       ((v_[i].array() / correction2).sqrt() + eps_);
  }
}

MetricReport EvaluatePrepared(BeliefTracker &model, const Ontology &ontology,
                              const OntologyTerms &terms,
                              const std::vector<PreparedDialogue> &dialogues) {
  std::vector<TurnDecision> predicted, gold;
  for (const auto &d : dialogues) {
    DialogueBelief belief = model.Track(ontology, terms, d.turns);
    for (const auto &turn : belief.turns) predicted.push_back(Decide(ontology, turn));
    for (auto &g : GoldDecisions(d.labels)) gold.push_back(std::move(g));
  }
  return ComputeReport(ontology, predicted, gold, static_cast<long>(dialogues.size()));
}

std::string EpochLog::ToTsv() const {
  std::ostringstream out;
  out.precision(10);
  out << epoch << '\t' << domain_loss << '\t' << slot_value_loss << '\t' << dev_joint << '\t'
      << dev_f1;
  return out.str();
}

TrainResult Train(const CorpusSplit &corpus, const Ontology &ontology, const EmbeddingTable &table,
                  const TrainConfig &config, const std::function<void(const EpochLog &)> &on_epoch) {
  config.Validate();
  if (table.dimension() != config.model.embedding_dim) {
    throw ValidationError("embedding dimension " + std::to_string(table.dimension()) +
                          " does not match configured " +
                          std::to_string(config.model.embedding_dim));
  }
  if (corpus.train.empty()) throw ValidationError("training split is empty");

  const OntologyTerms terms = OntologyTerms::Build(ontology, table);
  const auto train = Prepare(corpus.train, ontology, table);
  const auto dev = Prepare(corpus.dev, ontology, table);

  BeliefTracker model = InitParams(config);
  TrainResult result{model, {}, 0, -1};
  Adam optimizer(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5eedULL);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  int since_best = 0;
  int64_t step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossValues epoch_loss;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(config.batch_size)) {
      std::vector<const PreparedDialogue *> batch;
      for (size_t i = begin; i < std::min(order.size(), begin + config.batch_size); ++i) {
        batch.push_back(&train[order[i]]);
      }
      model.params().ZeroGrad();
      const int64_t dropout_seed =
          config.model.dropout > 0
              ? static_cast<int64_t>((config.seed * 1000003ULL + static_cast<uint64_t>(step)) >> 1)
              : -1;
      // L_d reaches only kDomain parameters and L_sv only kSlotValue ones, so
      // a single backward pass of their sum leaves each objective's gradient
      // on its own group; the two groups are then stepped separately.
      LossValues loss = AccumulateGradients(model, terms, batch, config, Objective::kBoth,
                                            dropout_seed);
      optimizer.Step(model.params(), ParamGroup::kDomain);
      optimizer.Step(model.params(), ParamGroup::kSlotValue);
      epoch_loss.domain += loss.domain;
      epoch_loss.slot_value += loss.slot_value;
      ++step;
    }

    EpochLog log;
    log.epoch = epoch;
    log.domain_loss = epoch_loss.domain / static_cast<double>(train.size());
    log.slot_value_loss = epoch_loss.slot_value / static_cast<double>(train.size());
    if (!dev.empty()) {
      MetricReport report = EvaluatePrepared(model, ontology, terms, dev);
      log.dev_joint = report.joint_goal_accuracy;
      log.dev_f1 = report.f1;
    } else {
      log.dev_joint = log.dev_f1 = std::numeric_limits<double>::quiet_NaN();
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    if (dev.empty() || log.dev_joint > result.best_dev_joint) {
      result.model = model;
      result.best_epoch = epoch;
      if (!dev.empty()) result.best_dev_joint = log.dev_joint;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  if (result.best_epoch == 0) result.model = model;  // zero epochs
  return result;
}

ParameterCount CountParameters(const BeliefTracker &model) {
  return {model.params().CountScalars(), model.params().CountByModule()};
}

GradientCheckReport GradientCheck(BeliefTracker &model, const OntologyTerms &terms,
                                  const std::vector<PreparedDialogue> &batch,
                                  const TrainConfig &config, double eps, double floor) {
  if (model.config().dropout > 0 || config.model.dropout > 0) {
    throw ValidationError(
        "gradient check needs dropout disabled: dropout masks make the loss stochastic, so "
        "finite differences would not match the analytic gradient (set dropout to 0)");
  }
  std::vector<const PreparedDialogue *> pointers;
  for (const auto &d : batch) pointers.push_back(&d);

  ParameterStore &store = model.params();
  store.ZeroGrad();
  AccumulateGradients(model, terms, pointers, config, Objective::kBoth, -1);

  GradientCheckReport report;
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter &p = store.at(static_cast<int>(i));
    double param_max = 0;
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double analytic = p.grad(k);
      if (!std::isfinite(analytic)) {
        throw RuntimeError("non-finite gradient for parameter " + p.name + "[" +
                           std::to_string(k) + "]");
      }
      const double original = p.value(k);
      p.value(k) = original + eps;
      LossValues plus = ComputeLoss(model, terms, pointers, config);
      p.value(k) = original - eps;
      LossValues minus = ComputeLoss(model, terms, pointers, config);
      p.value(k) = original;
      const double numeric =
          ((plus.domain + plus.slot_value) - (minus.domain + minus.slot_value)) / (2 * eps);
      const double err =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++report.scalars_checked;
      param_max = std::max(param_max, err);
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = p.name + "[" + std::to_string(k) + "]";
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
    report.parameters.emplace_back(p.name, param_max);
  }
  store.ZeroGrad();
  return report;
}

}  // namespace mdbt
