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

#include "mdbt/synthetic.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "mdbt/common.h"

namespace mdbt {
namespace {

struct SlotPool {
  const char *name;
  std::vector<const char *> values;
};

struct DomainPool {
  const char *name;
  std::vector<SlotPool> slots;
};

// Value words are unique across the whole pool so that a mention identifies
// its slot without any dialogue context.
const std::vector<DomainPool> &Pools() {
  static const std::vector<DomainPool> pools = {
      {"restaurant",
       {{"food", {"turkish", "chinese", "italian", "indian", "french", "thai", "korean", "spanish"}},
        {"area", {"centre", "north", "south", "east", "west", "riverside", "market", "station"}},
        {"price range",
         {"cheap", "moderate", "expensive", "affordable", "pricey", "luxurious", "budget",
          "premium"}}}},
      {"hotel",
       {{"type", {"guesthouse", "hostel", "motel", "inn", "lodge", "resort", "villa", "chalet"}},
        {"parking",
         {"free parking", "paid parking", "valet parking", "garage parking", "street parking",
          "underground parking", "private parking", "shared parking"}},
        {"district",
         {"chesterton", "trumpington", "newnham", "girton", "histon", "milton", "coton",
          "barton"}}}},
      {"attraction",
       {{"kind", {"museum", "theatre", "park", "college", "cinema", "gallery", "church", "zoo"}},
        {"location",
         {"downtown", "uptown", "suburbs", "harbour", "campus", "oldtown", "waterfront",
          "hillside"}},
        {"ticket",
         {"student ticket", "adult ticket", "child ticket", "senior ticket", "family ticket",
          "group ticket", "season ticket", "day ticket"}}}},
      {"train",
       {{"destination",
         {"london", "ely", "norwich", "stevenage", "peterborough", "leicester", "bishops",
          "broxbourne"}},
        {"day", {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
                 "weekend"}},
        {"class", {"standard", "firstclass", "sleeper", "economy", "business", "flexible",
                   "advance", "offpeak"}}}},
      {"taxi",
       {{"car", {"toyota", "ford", "skoda", "volvo", "audi", "tesla", "honda", "lexus"}},
        {"colour", {"black", "white", "red", "blue", "grey", "yellow", "silver", "green"}},
        {"pickup", {"airport", "hospital", "library", "university", "stadium", "cathedral",
                    "terminal", "quay"}}}},
  };
  return pools;
}

Ontology BuildOntology(const SyntheticSpec &spec) {
  const auto &pools = Pools();
  std::vector<DomainSpec> domains;
  for (int d = 0; d < spec.num_domains; ++d) {
    bool pooled_domain = d < static_cast<int>(pools.size());
    DomainSpec domain{pooled_domain ? pools[d].name : "domain" + std::to_string(d), {}};
    for (int s = 0; s < spec.slots_per_domain; ++s) {
      bool pooled_slot = pooled_domain && s < static_cast<int>(pools[d].slots.size());
      std::string slot_name =
          pooled_slot ? pools[d].slots[s].name : "d" + std::to_string(d) + "slot" + std::to_string(s);
      SlotSpec slot{slot_name, {}};
      for (int v = 0; v < spec.values_per_slot; ++v) {
        if (pooled_slot && v < static_cast<int>(pools[d].slots[s].values.size())) {
          slot.values.push_back(pools[d].slots[s].values[v]);
        } else {
          slot.values.push_back("d" + std::to_string(d) + "s" + std::to_string(s) + "v" +
                                std::to_string(v));
        }
      }
      domain.slots.push_back(std::move(slot));
    }
    domains.push_back(std::move(domain));
  }
  return Ontology(std::move(domains));
}

std::string Fill(std::string pattern, const std::string &domain, const std::string &slot,
                 const std::string &value) {
  auto replace = [&](const std::string &key, const std::string &with) {
    for (size_t pos; (pos = pattern.find(key)) != std::string::npos;) pattern.replace(pos, key.size(), with);
  };
  replace("{domain}", domain);
  replace("{slot}", slot);
  replace("{value}", value);
  return pattern;
}

class Generator {
 public:
  Generator(const SyntheticSpec &spec, const Ontology &ontology, uint64_t seed)
      : spec_(spec), ontology_(ontology), rng_(seed) {}

  Dialogue Make(const std::string &id) {
    Dialogue dialogue;
    dialogue.id = id;

    int max_domains = std::min(spec_.max_domains_per_dialogue, ontology_.num_domains());
    int num_domains = Uniform(1, max_domains);
    std::vector<int> domains(ontology_.num_domains());
    for (int d = 0; d < ontology_.num_domains(); ++d) domains[d] = d;
    std::shuffle(domains.begin(), domains.end(), rng_);
    domains.resize(num_domains);

    std::vector<int> open_slots;  // flat slot indices not yet set
    for (int s = 0; s < ontology_.num_slots(); ++s) {
      if (std::find(domains.begin(), domains.end(), ontology_.slot(s).domain) != domains.end()) {
        open_slots.push_back(s);
      }
    }

    int num_turns = Uniform(spec_.min_turns, spec_.max_turns);
    std::vector<BeliefEntry> belief;
    std::string goal = "goal:";
    for (int t = 0; t < num_turns; ++t) {
      bool filler = open_slots.empty() ||
                    (t > 0 && std::bernoulli_distribution(spec_.filler_probability)(rng_));
      std::string system, user;
      if (filler) {
        system = Pick(kFillerSystem);
        user = Pick(kFillerUser);
      } else {
        size_t pick = static_cast<size_t>(Uniform(0, static_cast<int>(open_slots.size()) - 1));
        int slot = open_slots[pick];
        open_slots.erase(open_slots.begin() + static_cast<long>(pick));
        const auto &ref = ontology_.slot(slot);
        int num_values = ontology_.NoneIndex(slot);
        const std::string &value = ontology_.Candidates(slot)[Uniform(0, num_values - 1)];
        switch (Uniform(0, 2)) {
          case 0:  // inform
            system = t == 0 ? "" : Pick(kOpenSystem);
            user = Fill(Pick(kInformUser), ref.domain_name, ref.slot_name, value);
            break;
          case 1:  // request
            system = Fill(Pick(kRequestSystem), ref.domain_name, ref.slot_name, value);
            user = Fill(Pick(kRequestUser), ref.domain_name, ref.slot_name, value);
            break;
          default:  // confirm
            system = Fill(Pick(kConfirmSystem), ref.domain_name, ref.slot_name, value);
            user = Pick(kConfirmUser);
            break;
        }
        belief.push_back({ref.domain_name, ref.slot_name, value});
        goal += " " + ref.domain_name + "/" + ref.slot_name + "=" + value;
      }
      if (t == 0 && filler) user = "hello";
      dialogue.turns.push_back(MakeTurn(system, user, belief));
    }
    dialogue.goal = goal;
    return dialogue;
  }

 private:
  int Uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  const char *Pick(const std::vector<const char *> &options) {
    return options[static_cast<size_t>(Uniform(0, static_cast<int>(options.size()) - 1))];
  }

  inline static const std::vector<const char *> kInformUser = {
      "i am looking for a {domain} with {value} {slot}",
      "i need a {domain} , {value} {slot} please",
      "i want {value} {slot}",
      "can you find me {value} {slot} ?",
  };
  inline static const std::vector<const char *> kOpenSystem = {
      "how can i help you ?", "is there anything else ?", "what else can i do for you ?"};
  inline static const std::vector<const char *> kRequestSystem = {
      "what {slot} would you like for the {domain} ?", "which {slot} do you prefer ?"};
  inline static const std::vector<const char *> kRequestUser = {"{value} please", "{value}",
                                                                 "i would like {value}"};
  inline static const std::vector<const char *> kConfirmSystem = {
      "would you like a {domain} with {value} {slot} ?", "shall i go with {value} {slot} ?"};
  inline static const std::vector<const char *> kConfirmUser = {"yes please", "yes , that is right",
                                                                "sure"};
  inline static const std::vector<const char *> kFillerSystem = {"let me check that for you .",
                                                                 "is there anything else ?"};
  inline static const std::vector<const char *> kFillerUser = {"thank you", "that sounds good",
                                                               "ok great"};

  const SyntheticSpec &spec_;
  const Ontology &ontology_;
  std::mt19937_64 rng_;
};

}  // namespace

SyntheticCorpus GenerateSynthetic(const SyntheticSpec &spec, uint64_t seed) {
  if (spec.num_domains < 1 || spec.slots_per_domain < 1 || spec.values_per_slot < 1) {
    throw ValidationError("synthetic spec needs at least one domain, slot and value");
  }
  if (spec.min_turns < 1 || spec.max_turns < spec.min_turns) {
    throw ValidationError("synthetic spec has an empty turn-length range");
  }
  if (spec.train_dialogues < 0 || spec.dev_dialogues < 0 || spec.test_dialogues < 0 ||
      spec.max_domains_per_dialogue < 1) {
    throw ValidationError("synthetic spec has a negative dialogue count");
  }
  SyntheticCorpus out{{}, BuildOntology(spec)};
  Generator gen(spec, out.ontology, seed);
  int next = 0;
  auto fill = [&](std::vector<Dialogue> &part, int count) {
    for (int i = 0; i < count; ++i) part.push_back(gen.Make("syn-" + std::to_string(next++)));
  };
  fill(out.corpus.train, spec.train_dialogues);
  fill(out.corpus.dev, spec.dev_dialogues);
  fill(out.corpus.test, spec.test_dialogues);
  return out;
}

EmbeddingTable SyntheticEmbeddings(const SyntheticCorpus &data, int dimension, uint64_t seed) {
  if (dimension < 1) throw ValidationError("embedding dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dimension)));
  auto draw = [&] {
    Eigen::VectorXd v(dimension);
    for (int i = 0; i < dimension; ++i) v[i] = normal(rng);
    return v;
  };

  // Ontology tokens get a share of their domain's and slot's centre vector,
  // the way a specialised space places "turkish" near "food" and near other
  // restaurant terms. A token keeps the role it is first seen in.
  std::map<std::string, Eigen::VectorXd> vectors;
  auto place = [&](const std::string &text, const Eigen::VectorXd &centre, double own) {
    for (const auto &token : Tokenize(text)) {
      if (vectors.count(token)) continue;
      vectors[token] = centre + own * draw();
    }
  };
  std::vector<Eigen::VectorXd> domain_centres, slot_centres;
  for (const auto &domain : data.ontology.domains()) {
    domain_centres.push_back(draw());
    for (size_t s = 0; s < domain.slots.size(); ++s) slot_centres.push_back(draw());
  }
  int flat = 0;
  for (size_t d = 0; d < data.ontology.domains().size(); ++d) {
    const auto &domain = data.ontology.domains()[d];
    place(domain.name, domain_centres[d], 0.3);
    for (const auto &slot : domain.slots) {
      const Eigen::VectorXd &slot_centre = slot_centres[flat++];
      place(slot.name, 0.6 * domain_centres[d] + slot_centre, 0.3);
      for (const auto &v : slot.values) place(v, 0.5 * domain_centres[d] + 0.5 * slot_centre, 1.0);
    }
  }

  std::set<std::string> rest;
  rest.insert(std::string(Ontology::kNone));
  for (const auto *part : {&data.corpus.train, &data.corpus.dev, &data.corpus.test}) {
    for (const auto &d : *part) {
      for (const auto &t : d.turns) {
        rest.insert(t.user_tokens.begin(), t.user_tokens.end());
        rest.insert(t.system_tokens.begin(), t.system_tokens.end());
      }
    }
  }
  for (const auto &token : rest) {
    if (!vectors.count(token)) vectors[token] = draw();
  }

  EmbeddingTable table(dimension, seed);
  for (auto &[token, v] : vectors) table.Add(token, v / v.norm());
  return table;
}

}  // namespace mdbt
