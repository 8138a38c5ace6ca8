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

#ifndef MDBT_EMBEDDINGS_H_
#define MDBT_EMBEDDINGS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace mdbt {

// Read-only table of pre-trained word vectors. Lookups never mutate it, so a
// loaded table may be shared between threads.
//
// Out-of-vocabulary tokens map to a pseudo-random vector seeded by a hash of
// the token (and oov_seed). The vector is scaled to the median norm of the
// in-vocabulary rows, so OOV words look statistically like known words to the
// encoders while staying distinguishable from each other.
class EmbeddingTable;
EmbeddingTable LoadEmbeddings(const std::string &path, uint64_t oov_seed);

class EmbeddingTable {
 public:
  EmbeddingTable(int dimension, uint64_t oov_seed = 0);

  // Adds or replaces a row; the vector length must equal dimension().
  void Add(const std::string &token, const Eigen::VectorXd &vector);

  int dimension() const { return dimension_; }
  size_t size() const { return tokens_.size(); }
  uint64_t oov_seed() const { return oov_seed_; }
  bool Contains(std::string_view token) const;
  double median_norm() const { return median_norm_; }

  // Tokens in insertion (file) order.
  const std::vector<std::string> &tokens() const { return tokens_; }

  Eigen::VectorXd EmbedToken(std::string_view token) const;

  // Sum of the token vectors of the tokenized term.
  Eigen::VectorXd EmbedTerm(std::string_view term) const;

  // D x T matrix with one column per token.
  Eigen::MatrixXd EmbedSequence(const std::vector<std::string> &tokens) const;

  // Writes `token f_1 ... f_D` lines with round-trip precision.
  void Save(const std::string &path) const;

 private:
  friend EmbeddingTable LoadEmbeddings(const std::string &path, uint64_t oov_seed);

  void Append(const std::string &token, const Eigen::VectorXd &vector);
  void UpdateMedianNorm();

  int dimension_;
  uint64_t oov_seed_;
  double median_norm_ = 1.0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<Eigen::VectorXd> rows_;
};

// Loads a whitespace-separated text file; D is inferred from the first line.
EmbeddingTable LoadEmbeddings(const std::string &path, uint64_t oov_seed = 0);

}  // namespace mdbt

#endif  // MDBT_EMBEDDINGS_H_
