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

#ifndef MDBT_ONTOLOGY_H_
#define MDBT_ONTOLOGY_H_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mdbt/embeddings.h"

namespace mdbt {

struct SlotSpec {
  std::string name;
  std::vector<std::string> values;
};

struct DomainSpec {
  std::string name;
  std::vector<SlotSpec> slots;
};

// Domain -> slot -> value registry. Every slot tracks its declared values plus
// an implicit trailing "none" candidate, which is never stored explicitly.
//
// Slots are also addressed by a flat index over all (domain, slot) pairs, in
// declaration order; the tracker lays candidate logits out in that order.
class Ontology {
 public:
  static constexpr std::string_view kNone = "none";

  struct SlotRef {
    int domain;
    int slot_in_domain;
    std::string domain_name;
    std::string slot_name;
  };

  Ontology() = default;
  explicit Ontology(std::vector<DomainSpec> domains);

  const std::vector<DomainSpec> &domains() const { return domains_; }
  int num_domains() const { return static_cast<int>(domains_.size()); }
  int num_slots() const { return static_cast<int>(slots_.size()); }
  int num_values() const;  // declared values, none excluded
  const SlotRef &slot(int index) const { return slots_.at(index); }

  int DomainIndex(std::string_view domain) const;  // -1 if absent
  int SlotIndex(std::string_view domain, std::string_view slot) const;  // -1 if absent

  // Declared values followed by "none". Throws on an unknown slot.
  std::vector<std::string> Candidates(std::string_view domain, std::string_view slot) const;
  const std::vector<std::string> &Candidates(int slot_index) const {
    return candidates_.at(slot_index);
  }
  int NoneIndex(int slot_index) const {
    return static_cast<int>(candidates_.at(slot_index).size()) - 1;
  }
  int CandidateIndex(int slot_index, std::string_view value) const;  // -1 if absent

  // Offsets of each slot's candidates in the flat candidate layout;
  // size num_slots()+1.
  const std::vector<int> &candidate_offsets() const { return offsets_; }
  int total_candidates() const { return offsets_.empty() ? 0 : offsets_.back(); }

  // Canonical JSON text (declaration order preserved).
  std::string ToJson(int indent = 2) const;

  // Hash of the canonical form; whitespace-only edits do not change it.
  std::string Fingerprint() const;

 private:
  std::vector<DomainSpec> domains_;
  std::vector<SlotRef> slots_;
  std::vector<std::vector<std::string>> candidates_;
  std::vector<int> offsets_;
};

Ontology ParseOntology(std::string_view json_text);
Ontology LoadOntology(const std::string &path);
void SaveOntology(const Ontology &ontology, const std::string &path);

// Embedding of a domain, slot or value term. "none" embeds as the literal
// token through the shared table.
Eigen::VectorXd TermEmbedding(const EmbeddingTable &table, std::string_view term);

}  // namespace mdbt

#endif  // MDBT_ONTOLOGY_H_
