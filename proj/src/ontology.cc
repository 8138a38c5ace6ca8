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

#include "mdbt/ontology.h"

#include <set>

#include "json.hpp"
#include "mdbt/common.h"

namespace mdbt {

using ordered_json = nlohmann::ordered_json;

Ontology::Ontology(std::vector<DomainSpec> domains) : domains_(std::move(domains)) {
  std::set<std::string> domain_names;
  offsets_.push_back(0);
  for (size_t d = 0; d < domains_.size(); ++d) {
    const auto &domain = domains_[d];
    if (domain.name.empty()) throw ValidationError("ontology: empty domain name");
    if (!domain_names.insert(domain.name).second) {
      throw ValidationError("ontology: duplicate domain '" + domain.name + "'");
    }
    std::set<std::string> slot_names;
    for (size_t s = 0; s < domain.slots.size(); ++s) {
      const auto &slot = domain.slots[s];
      if (slot.name.empty()) throw ValidationError("ontology: empty slot name in " + domain.name);
      if (!slot_names.insert(slot.name).second) {
        throw ValidationError("ontology: duplicate slot '" + slot.name + "' in domain '" +
                              domain.name + "'");
      }
      std::set<std::string> values;
      for (const auto &v : slot.values) {
        if (v.empty()) throw ValidationError("ontology: empty value in " + domain.name + "/" + slot.name);
        if (v == kNone) {
          throw ValidationError("ontology: value 'none' is reserved (" + domain.name + "/" +
                                slot.name + ")");
        }
        if (!values.insert(v).second) {
          throw ValidationError("ontology: duplicate value '" + v + "' in " + domain.name + "/" +
                                slot.name);
        }
      }
      slots_.push_back({static_cast<int>(d), static_cast<int>(s), domain.name, slot.name});
      auto cands = slot.values;
      cands.emplace_back(kNone);
      offsets_.push_back(offsets_.back() + static_cast<int>(cands.size()));
      candidates_.push_back(std::move(cands));
    }
  }
}

int Ontology::num_values() const {
  int n = 0;
  for (const auto &c : candidates_) n += static_cast<int>(c.size()) - 1;
  return n;
}

int Ontology::DomainIndex(std::string_view domain) const {
  for (size_t d = 0; d < domains_.size(); ++d) {
    if (domains_[d].name == domain) return static_cast<int>(d);
  }
  return -1;
}

int Ontology::SlotIndex(std::string_view domain, std::string_view slot) const {
  for (size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].domain_name == domain && slots_[i].slot_name == slot) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> Ontology::Candidates(std::string_view domain, std::string_view slot) const {
  int index = SlotIndex(domain, slot);
  if (index < 0) {
    throw ValidationError("unknown slot: " + std::string(domain) + "/" + std::string(slot));
  }
  return candidates_[index];
}

int Ontology::CandidateIndex(int slot_index, std::string_view value) const {
  const auto &cands = candidates_.at(slot_index);
  for (size_t i = 0; i < cands.size(); ++i) {
    if (cands[i] == value) return static_cast<int>(i);
  }
  return -1;
}

std::string Ontology::ToJson(int indent) const {
  ordered_json root = ordered_json::object();
  for (const auto &domain : domains_) {
    ordered_json slots = ordered_json::object();
    for (const auto &slot : domain.slots) slots[slot.name] = slot.values;
    root[domain.name] = std::move(slots);
  }
  return root.dump(indent) + (indent >= 0 ? "\n" : "");
}

std::string Ontology::Fingerprint() const { return HexDigest(Fnv1a64(ToJson(-1))); }

namespace {

// nlohmann's object types silently keep one of several duplicate keys; the
// parser callback sees every key, so duplicates are caught there.
ordered_json ParseRejectingDuplicateKeys(std::string_view text, const std::string &what) {
  std::vector<std::set<std::string>> open_objects;
  auto callback = [&](int /*depth*/, ordered_json::parse_event_t event, ordered_json &parsed) {
    using E = ordered_json::parse_event_t;
    if (event == E::object_start) {
      open_objects.emplace_back();
    } else if (event == E::object_end) {
      open_objects.pop_back();
    } else if (event == E::key) {
      auto key = parsed.get<std::string>();
      if (!open_objects.back().insert(key).second) {
        throw ValidationError(what + ": duplicate key '" + key + "'");
      }
    }
    return true;
  };
  try {
    return ordered_json::parse(text.begin(), text.end(), callback);
  } catch (const ordered_json::parse_error &e) {
    throw ValidationError(what + ": " + e.what());
  }
}

}  // namespace

Ontology ParseOntology(std::string_view json_text) {
  auto root = ParseRejectingDuplicateKeys(json_text, "ontology");
  if (!root.is_object()) throw ValidationError("ontology: top level must be an object");
  std::vector<DomainSpec> domains;
  for (auto &[domain_name, slots] : root.items()) {
    if (!slots.is_object()) {
      throw ValidationError("ontology: domain '" + domain_name + "' must map to an object");
    }
    DomainSpec domain{domain_name, {}};
    for (auto &[slot_name, values] : slots.items()) {
      if (!values.is_array()) {
        throw ValidationError("ontology: slot '" + domain_name + "/" + slot_name +
                              "' must map to an array");
      }
      SlotSpec slot{slot_name, {}};
      for (const auto &v : values) {
        if (!v.is_string()) {
          throw ValidationError("ontology: non-string value in " + domain_name + "/" + slot_name);
        }
        slot.values.push_back(v.get<std::string>());
      }
      domain.slots.push_back(std::move(slot));
    }
    domains.push_back(std::move(domain));
  }
  return Ontology(std::move(domains));
}

Ontology LoadOntology(const std::string &path) { return ParseOntology(ReadFile(path)); }

void SaveOntology(const Ontology &ontology, const std::string &path) {
  WriteFile(path, ontology.ToJson());
}

Eigen::VectorXd TermEmbedding(const EmbeddingTable &table, std::string_view term) {
  return table.EmbedTerm(term);
}

}  // namespace mdbt
