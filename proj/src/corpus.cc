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

#include "mdbt/corpus.h"

#include <map>
#include <set>

#include "json.hpp"
#include "mdbt/common.h"

namespace mdbt {

using ordered_json = nlohmann::ordered_json;

std::vector<double> SlotValueLabels::OneHot(const Ontology &ontology, int turn, int slot) const {
  std::vector<double> v(ontology.Candidates(slot).size(), 0.0);
  v.at(value.at(turn).at(slot)) = 1.0;
  return v;
}

Turn MakeTurn(std::string system, std::string user, std::vector<BeliefEntry> belief) {
  Turn turn;
  turn.system_tokens = Tokenize(system);
  turn.user_tokens = Tokenize(user);
  turn.system = std::move(system);
  turn.user = std::move(user);
  turn.belief = std::move(belief);
  return turn;
}

void ValidateDialogue(const Dialogue &dialogue, const Ontology &ontology) {
  if (dialogue.turns.empty()) {
    throw ValidationError("dialogue '" + dialogue.id + "' has no turns");
  }
  for (size_t t = 0; t < dialogue.turns.size(); ++t) {
    const auto &turn = dialogue.turns[t];
    std::string where = "dialogue '" + dialogue.id + "' turn " + std::to_string(t + 1);
    if (turn.user_tokens.empty()) throw ValidationError(where + ": empty user utterance");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto &entry : turn.belief) {
      if (ontology.DomainIndex(entry.domain) < 0) {
        throw ValidationError(where + ": unknown domain '" + entry.domain + "'");
      }
      int slot = ontology.SlotIndex(entry.domain, entry.slot);
      if (slot < 0) {
        throw ValidationError(where + ": unknown slot '" + entry.slot + "' in domain '" +
                              entry.domain + "'");
      }
      int value = ontology.CandidateIndex(slot, entry.value);
      if (value < 0 || value == ontology.NoneIndex(slot)) {
        throw ValidationError(where + ": unknown value '" + entry.value + "' for " + entry.domain +
                              "/" + entry.slot);
      }
      if (!seen.insert({entry.domain, entry.slot}).second) {
        throw ValidationError(where + ": slot " + entry.domain + "/" + entry.slot +
                              " labelled twice");
      }
    }
  }
}

namespace {

Dialogue ParseDialogue(const ordered_json &j, size_t position) {
  std::string where = "corpus: dialogue #" + std::to_string(position);
  if (!j.is_object()) throw ValidationError(where + " is not an object");
  Dialogue dialogue;
  try {
    dialogue.id = j.at("id").get<std::string>();
    where = "corpus: dialogue '" + dialogue.id + "'";
    dialogue.goal = j.value("goal", std::string());
    const auto &turns = j.at("turns");
    if (!turns.is_array()) throw ValidationError(where + ": turns must be an array");
    for (size_t t = 0; t < turns.size(); ++t) {
      const auto &jt = turns[t];
      std::vector<BeliefEntry> belief;
      if (jt.contains("belief")) {
        for (const auto &[domain, slots] : jt.at("belief").items()) {
          for (const auto &[slot, value] : slots.items()) {
            belief.push_back({domain, slot, value.get<std::string>()});
          }
        }
      }
      dialogue.turns.push_back(MakeTurn(jt.value("system", std::string()),
                                        jt.at("user").get<std::string>(), std::move(belief)));
    }
  } catch (const ordered_json::exception &e) {
    throw ValidationError(where + ": " + e.what());
  }
  return dialogue;
}

ordered_json DialogueToJson(const Dialogue &dialogue) {
  ordered_json turns = ordered_json::array();
  for (const auto &turn : dialogue.turns) {
    ordered_json belief = ordered_json::object();
    for (const auto &e : turn.belief) belief[e.domain][e.slot] = e.value;
    turns.push_back({{"system", turn.system}, {"user", turn.user}, {"belief", belief}});
  }
  return {{"id", dialogue.id}, {"goal", dialogue.goal}, {"turns", turns}};
}

}  // namespace

CorpusSplit ParseCorpus(std::string_view json_text, const Ontology &ontology) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text.begin(), json_text.end());
  } catch (const ordered_json::parse_error &e) {
    throw ValidationError(std::string("corpus: ") + e.what());
  }
  if (!root.is_object() || !root.contains("dialogues") || !root["dialogues"].is_array()) {
    throw ValidationError("corpus: expected an object with a \"dialogues\" array");
  }

  std::vector<Dialogue> dialogues;
  std::map<std::string, size_t> by_id;
  for (size_t i = 0; i < root["dialogues"].size(); ++i) {
    Dialogue d = ParseDialogue(root["dialogues"][i], i);
    ValidateDialogue(d, ontology);
    if (!by_id.emplace(d.id, dialogues.size()).second) {
      throw ValidationError("corpus: duplicate dialogue id '" + d.id + "'");
    }
    dialogues.push_back(std::move(d));
  }

  CorpusSplit split;
  if (!root.contains("split")) {
    split.train = std::move(dialogues);
    return split;
  }
  std::vector<bool> used(dialogues.size(), false);
  auto take = [&](const char *name, std::vector<Dialogue> &out) {
    if (!root["split"].contains(name)) return;
    for (const auto &jid : root["split"][name]) {
      auto id = jid.get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw ValidationError(std::string("corpus: split '") + name + "' names unknown dialogue '" +
                              id + "'");
      }
      if (used[it->second]) {
        throw ValidationError("corpus: dialogue '" + id + "' appears in more than one split");
      }
      used[it->second] = true;
      out.push_back(dialogues[it->second]);
    }
  };
  take("train", split.train);
  take("dev", split.dev);
  take("test", split.test);
  for (size_t i = 0; i < dialogues.size(); ++i) {
    if (!used[i]) {
      throw ValidationError("corpus: dialogue '" + dialogues[i].id + "' is not assigned to a split");
    }
  }
  return split;
}

CorpusSplit LoadCorpus(const std::string &path, const Ontology &ontology) {
  try {
    return ParseCorpus(ReadFile(path), ontology);
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string CorpusToJson(const CorpusSplit &corpus) {
  ordered_json dialogues = ordered_json::array();
  ordered_json split = ordered_json::object();
  auto add = [&](const char *name, const std::vector<Dialogue> &part) {
    ordered_json ids = ordered_json::array();
    for (const auto &d : part) {
      dialogues.push_back(DialogueToJson(d));
      ids.push_back(d.id);
    }
    split[name] = std::move(ids);
  };
  add("train", corpus.train);
  add("dev", corpus.dev);
  add("test", corpus.test);
  ordered_json root = {{"dialogues", std::move(dialogues)}, {"split", std::move(split)}};
  return root.dump(1) + "\n";
}

void SaveCorpus(const CorpusSplit &corpus, const std::string &path) {
  WriteFile(path, CorpusToJson(corpus));
}

DialogueLabels SplitLabels(const Dialogue &dialogue, const Ontology &ontology) {
  DialogueLabels labels;
  std::vector<int> current(ontology.num_slots());
  for (int s = 0; s < ontology.num_slots(); ++s) current[s] = ontology.NoneIndex(s);
  for (const auto &turn : dialogue.turns) {
    for (const auto &entry : turn.belief) {
      int slot = ontology.SlotIndex(entry.domain, entry.slot);
      current[slot] = ontology.CandidateIndex(slot, entry.value);
    }
    std::vector<int> active(ontology.num_domains(), 0);
    for (int s = 0; s < ontology.num_slots(); ++s) {
      if (current[s] != ontology.NoneIndex(s)) active[ontology.slot(s).domain] = 1;
    }
    labels.domains.active.push_back(std::move(active));
    labels.slots.value.push_back(current);
  }
  return labels;
}

CorpusStats ComputeStats(const std::vector<Dialogue> &dialogues, const Ontology &ontology) {
  CorpusStats stats;
  size_t user_tokens = 0, system_tokens = 0;
  for (const auto &d : dialogues) {
    ++stats.dialogues;
    stats.turns += static_cast<int>(d.turns.size());
    for (const auto &t : d.turns) {
      user_tokens += t.user_tokens.size();
      system_tokens += t.system_tokens.size();
    }
    auto labels = SplitLabels(d, ontology);
    int domains = 0;
    for (int a : labels.domains.active.back()) domains += a;
    if (domains == 1) ++stats.single_domain;
    if (domains >= 2) ++stats.multi_domain;
  }
  if (stats.turns > 0) {
    stats.mean_user_tokens = static_cast<double>(user_tokens) / stats.turns;
    stats.mean_system_tokens = static_cast<double>(system_tokens) / stats.turns;
  }
  return stats;
}

}  // namespace mdbt
