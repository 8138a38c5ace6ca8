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

#ifndef MDBT_TESTS_FIXTURES_H_
#define MDBT_TESTS_FIXTURES_H_

#include <filesystem>
#include <random>
#include <string>

#include "mdbt/corpus.h"
#include "mdbt/embeddings.h"
#include "mdbt/ontology.h"
#include "mdbt/training.h"

namespace mdbt::testing {

// restaurant{food: 3 values, area: 2} + hotel{parking: 2}.
inline Ontology SmallOntology() {
  return Ontology({{"restaurant",
                    {{"food", {"turkish", "chinese", "italian"}}, {"area", {"north", "south"}}}},
                   {"hotel", {{"parking", {"free", "paid"}}}}});
}

// Every ontology token plus a few carrier words, N(0, 1/D) entries.
inline EmbeddingTable RandomTable(int dim, uint64_t seed = 5) {
  EmbeddingTable table(dim, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(dim)));
  for (const char *w : {"restaurant", "food", "turkish", "chinese", "italian", "area", "north",
                        "south", "hotel", "parking", "free", "paid", "none", "i", "want", "a",
                        "yes", "please", "what", "would", "you", "like"}) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    table.Add(w, v);
  }
  return table;
}

inline Dialogue SmallDialogue() {
  Dialogue d;
  d.id = "small";
  d.turns.push_back(MakeTurn("", "i want turkish food", {{"restaurant", "food", "turkish"}}));
  d.turns.push_back(MakeTurn("what area would you like ?", "north please",
                             {{"restaurant", "food", "turkish"}, {"restaurant", "area", "north"}}));
  return d;
}

inline TrainConfig TinyConfig(EncoderKind kind = EncoderKind::kCnn,
                              UpdateVariant variant = UpdateVariant::kMemoryRnn) {
  TrainConfig c;
  c.model.encoder = kind;
  c.model.embedding_dim = 10;
  c.model.hidden_dim = 8;
  c.model.dropout = 0;
  c.model.domain_update = c.model.slot_update = variant;
  return c;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &name) {
    path_ = std::filesystem::temp_directory_path() /
            ("mdbt_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string operator/(const std::string &file) const { return (path_ / file).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace mdbt::testing

#endif  // MDBT_TESTS_FIXTURES_H_
