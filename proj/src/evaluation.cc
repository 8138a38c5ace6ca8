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

#include "mdbt/evaluation.h"

#include <random>
#include <sstream>

#include "json.hpp"
#include "mdbt/common.h"

namespace mdbt {
namespace {

void CheckAligned(const std::vector<TurnDecision> &predicted, const std::vector<TurnDecision> &gold) {
  if (predicted.size() != gold.size()) {
    throw ValidationError("metrics: " + std::to_string(predicted.size()) + " predicted turns vs " +
                          std::to_string(gold.size()) + " gold turns");
  }
  for (size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].slot_value.size() != gold[i].slot_value.size() ||
        predicted[i].domain_active.size() != gold[i].domain_active.size()) {
      throw ValidationError("metrics: turn " + std::to_string(i) + " has mismatched slot layout");
    }
  }
}

}  // namespace

TurnDecision Decide(const Ontology &ontology, const TurnBelief &belief, double threshold) {
  TurnDecision d;
  for (Eigen::Index i = 0; i < belief.domains.size(); ++i) {
    d.domain_active.push_back(belief.domains[i] >= threshold ? 1 : 0);
  }
  for (int s = 0; s < ontology.num_slots(); ++s) {
    Eigen::Index best = 0;
    belief.slots[s].maxCoeff(&best);
    d.slot_value.push_back(static_cast<int>(best));
  }
  return d;
}

std::vector<TurnDecision> GoldDecisions(const DialogueLabels &labels) {
  std::vector<TurnDecision> out;
  for (size_t t = 0; t < labels.slots.value.size(); ++t) {
    out.push_back({labels.domains.active[t], labels.slots.value[t]});
  }
  return out;
}

double JointGoalAccuracy(const std::vector<TurnDecision> &predicted,
                         const std::vector<TurnDecision> &gold) {
  CheckAligned(predicted, gold);
  if (gold.empty()) return 0;
  long correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].slot_value == gold[i].slot_value) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

F1Counts MultiDomainF1(const Ontology &ontology, const std::vector<TurnDecision> &predicted,
                       const std::vector<TurnDecision> &gold) {
  CheckAligned(predicted, gold);
  F1Counts c;
  for (size_t i = 0; i < gold.size(); ++i) {
    for (int s = 0; s < ontology.num_slots(); ++s) {
      const int none = ontology.NoneIndex(s);
      const int p = predicted[i].slot_value[s], g = gold[i].slot_value[s];
      if (p != none) {
        if (p == g) {
          ++c.true_positive;
        } else {
          ++c.false_positive;
        }
      } else if (g != none) {
        ++c.false_negative;
      }
    }
  }
  const long predicted_pos = c.true_positive + c.false_positive;
  const long gold_pos = c.true_positive + c.false_negative;
  if (predicted_pos == 0 && gold_pos == 0) {
    c.precision = c.recall = c.f1 = 1.0;
    return c;
  }
  c.precision = predicted_pos ? static_cast<double>(c.true_positive) / predicted_pos : 0.0;
  c.recall = gold_pos ? static_cast<double>(c.true_positive) / gold_pos : 0.0;
  c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
  return c;
}

MetricReport ComputeReport(const Ontology &ontology, const std::vector<TurnDecision> &predicted,
                           const std::vector<TurnDecision> &gold, long dialogues) {
  CheckAligned(predicted, gold);
  MetricReport r;
  r.turns = static_cast<long>(gold.size());
  r.dialogues = dialogues;
  r.joint_goal_accuracy = JointGoalAccuracy(predicted, gold);
  F1Counts f1 = MultiDomainF1(ontology, predicted, gold);
  r.f1 = f1.f1;
  r.precision = f1.precision;
  r.recall = f1.recall;

  std::vector<long> slot_correct(ontology.num_slots(), 0);
  long domain_correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    for (int s = 0; s < ontology.num_slots(); ++s) {
      if (predicted[i].slot_value[s] == gold[i].slot_value[s]) ++slot_correct[s];
    }
    for (size_t d = 0; d < gold[i].domain_active.size(); ++d) {
      if (predicted[i].domain_active[d] == gold[i].domain_active[d]) ++domain_correct;
    }
  }
  long all_correct = 0;
  for (int s = 0; s < ontology.num_slots(); ++s) {
    const auto &ref = ontology.slot(s);
    r.slot_accuracy.emplace_back(ref.domain_name + "/" + ref.slot_name,
                                 r.turns ? static_cast<double>(slot_correct[s]) / r.turns : 0.0);
    all_correct += slot_correct[s];
  }
  const long slot_decisions = r.turns * ontology.num_slots();
  const long domain_decisions = r.turns * ontology.num_domains();
  r.overall_accuracy = slot_decisions ? static_cast<double>(all_correct) / slot_decisions : 0.0;
  r.domain_accuracy = domain_decisions ? static_cast<double>(domain_correct) / domain_decisions : 0.0;
  return r;
}

double ExpectedUniformSlotAccuracy(const Ontology &ontology) {
  if (ontology.num_slots() == 0) return 0;
  double sum = 0;
  for (int s = 0; s < ontology.num_slots(); ++s) sum += 1.0 / ontology.Candidates(s).size();
  return sum / ontology.num_slots();
}

MetricReport UniformBaseline(const Ontology &ontology, const std::vector<DialogueLabels> &labels,
                             uint64_t seed, int passes) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<TurnDecision> predicted, gold;
  long dialogues = 0;
  for (int pass = 0; pass < std::max(passes, 1); ++pass) {
    for (const auto &dl : labels) {
      ++dialogues;
      for (const auto &g : GoldDecisions(dl)) {
        TurnDecision p;
        for (int d = 0; d < ontology.num_domains(); ++d) p.domain_active.push_back(coin(rng) ? 1 : 0);
        for (int s = 0; s < ontology.num_slots(); ++s) {
          int n = static_cast<int>(ontology.Candidates(s).size());
          p.slot_value.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
        }
        predicted.push_back(std::move(p));
        gold.push_back(g);
      }
    }
  }
  MetricReport r = ComputeReport(ontology, predicted, gold, dialogues);
  r.expected_slot_accuracy = ExpectedUniformSlotAccuracy(ontology);
  return r;
}

std::string MetricReport::ToTsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "joint_goal_accuracy\t" << joint_goal_accuracy << "\n"
      << "f1\t" << f1 << "\n"
      << "precision\t" << precision << "\n"
      << "recall\t" << recall << "\n"
      << "overall_accuracy\t" << overall_accuracy << "\n"
      << "domain_accuracy\t" << domain_accuracy << "\n"
      << "turns\t" << turns << "\n"
      << "dialogues\t" << dialogues << "\n";
  if (expected_slot_accuracy >= 0) out << "expected_slot_accuracy\t" << expected_slot_accuracy << "\n";
  for (const auto &[slot, acc] : slot_accuracy) out << "slot_accuracy." << slot << "\t" << acc << "\n";
  return out.str();
}

std::string MetricReport::ToJson() const {
  nlohmann::ordered_json j;
  j["joint_goal_accuracy"] = joint_goal_accuracy;
  j["f1"] = f1;
  j["precision"] = precision;
  j["recall"] = recall;
  j["overall_accuracy"] = overall_accuracy;
  j["domain_accuracy"] = domain_accuracy;
  j["turns"] = turns;
  j["dialogues"] = dialogues;
  if (expected_slot_accuracy >= 0) j["expected_slot_accuracy"] = expected_slot_accuracy;
  nlohmann::ordered_json slots = nlohmann::ordered_json::object();
  for (const auto &[slot, acc] : slot_accuracy) slots[slot] = acc;
  j["slot_accuracy"] = slots;
  return j.dump(2) + "\n";
}

}  // namespace mdbt
