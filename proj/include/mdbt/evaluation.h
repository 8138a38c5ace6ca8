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

#ifndef MDBT_EVALUATION_H_
#define MDBT_EVALUATION_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdbt/belief_update.h"
#include "mdbt/corpus.h"
#include "mdbt/ontology.h"

namespace mdbt {

// Hard decisions for one turn: domain activity and the chosen candidate index
// for every flat slot.
struct TurnDecision {
  std::vector<int> domain_active;
  std::vector<int> slot_value;

  bool operator==(const TurnDecision &) const = default;
};

inline constexpr double kDomainThreshold = 0.5;

// Domain d is active iff P(d) >= threshold. Every slot takes its argmax
// candidate, which is also the argmax of the joint P(d) P(s, .) since P(d) is
// a common factor; domain activity does not override slot decisions.
TurnDecision Decide(const Ontology &ontology, const TurnBelief &belief,
                    double threshold = kDomainThreshold);

// Gold decisions of every turn of a dialogue.
std::vector<TurnDecision> GoldDecisions(const DialogueLabels &labels);

struct F1Counts {
  long true_positive = 0;
  long false_positive = 0;
  long false_negative = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Fraction of turns whose every slot (of every domain, "none" included)
// matches the gold value.
double JointGoalAccuracy(const std::vector<TurnDecision> &predicted,
                         const std::vector<TurnDecision> &gold);

// Micro-averaged over (turn, slot): non-none values are positives, "none" is
// the negative class. A non-none prediction is a TP when it equals the gold
// value and an FP otherwise; a "none" prediction against a non-none gold value
// is an FN. With no positives on either side F1 is 1.
F1Counts MultiDomainF1(const Ontology &ontology, const std::vector<TurnDecision> &predicted,
                       const std::vector<TurnDecision> &gold);

struct MetricReport {
  std::vector<std::pair<std::string, double>> slot_accuracy;  // "domain/slot" -> fraction
  double joint_goal_accuracy = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  double overall_accuracy = 0;  // over (turn, slot) pairs
  double domain_accuracy = 0;   // over (turn, domain) pairs
  long turns = 0;
  long dialogues = 0;
  // Set by the uniform baseline only: the analytic per-slot accuracy
  // expectation, mean over slots of 1 / (|values| + 1).
  double expected_slot_accuracy = -1;

  std::string ToTsv() const;
  std::string ToJson() const;
};

MetricReport ComputeReport(const Ontology &ontology, const std::vector<TurnDecision> &predicted,
                           const std::vector<TurnDecision> &gold, long dialogues);

// Samples every slot uniformly from values + none and every domain indicator
// uniformly from {0, 1}; slot draws are scored as-is (not gated by the domain
// draw). The labels are swept `passes` times to reach the requested number of
// draws.
MetricReport UniformBaseline(const Ontology &ontology, const std::vector<DialogueLabels> &labels,
                             uint64_t seed, int passes = 1);

double ExpectedUniformSlotAccuracy(const Ontology &ontology);

}  // namespace mdbt

#endif  // MDBT_EVALUATION_H_
