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

#include "mdbt/embeddings.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "mdbt/common.h"

namespace mdbt {

EmbeddingTable::EmbeddingTable(int dimension, uint64_t oov_seed)
    : dimension_(dimension), oov_seed_(oov_seed) {
  if (dimension <= 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingTable::Add(const std::string &token, const Eigen::VectorXd &vector) {
  Append(token, vector);
  UpdateMedianNorm();
}

void EmbeddingTable::Append(const std::string &token, const Eigen::VectorXd &vector) {
  if (vector.size() != dimension_) {
    throw ValidationError("embedding for '" + token + "' has dimension " +
                          std::to_string(vector.size()) + ", expected " +
                          std::to_string(dimension_));
  }
  auto it = index_.find(token);
  if (it != index_.end()) {
    rows_[it->second] = vector;
  } else {
    index_.emplace(token, rows_.size());
    tokens_.push_back(token);
    rows_.push_back(vector);
  }
}

bool EmbeddingTable::Contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

void EmbeddingTable::UpdateMedianNorm() {
  if (rows_.empty()) {
    median_norm_ = 1.0;
    return;
  }
  std::vector<double> norms;
  norms.reserve(rows_.size());
  for (const auto &r : rows_) norms.push_back(r.norm());
  size_t mid = norms.size() / 2;
  std::nth_element(norms.begin(), norms.begin() + mid, norms.end());
  double median = norms[mid];
  if (norms.size() % 2 == 0) {
    double lower = *std::max_element(norms.begin(), norms.begin() + mid);
    median = 0.5 * (median + lower);
  }
  median_norm_ = median > 0 ? median : 1.0;
}

Eigen::VectorXd EmbeddingTable::EmbedToken(std::string_view token) const {
  if (token.empty()) throw ValidationError("cannot embed an empty token");
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return rows_[it->second];

  std::mt19937_64 rng(Fnv1a64(token) ^ (oov_seed_ * 0x9e3779b97f4a7c15ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dimension_);
  for (int i = 0; i < dimension_; ++i) v[i] = normal(rng);
  double n = v.norm();
  if (n == 0) {
    v.setConstant(1.0);
    n = v.norm();
  }
  return v * (median_norm_ / n);
}

Eigen::VectorXd EmbeddingTable::EmbedTerm(std::string_view term) const {
  auto tokens = Tokenize(term);
  if (tokens.empty()) throw ValidationError("cannot embed an empty term");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension_);
  for (const auto &t : tokens) sum += EmbedToken(t);
  return sum;
}

Eigen::MatrixXd EmbeddingTable::EmbedSequence(const std::vector<std::string> &tokens) const {
  Eigen::MatrixXd m(dimension_, static_cast<Eigen::Index>(tokens.size()));
  for (size_t i = 0; i < tokens.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = EmbedToken(tokens[i]);
  return m;
}

void EmbeddingTable::Save(const std::string &path) const {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i];
    for (int j = 0; j < dimension_; ++j) out << ' ' << rows_[i][j];
    out << '\n';
  }
  WriteFile(path, out.str());
}

EmbeddingTable LoadEmbeddings(const std::string &path, uint64_t oov_seed) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embeddings file: " + path);

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::string line;
  int dimension = -1;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;  // blank line
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      double x = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
      values.push_back(x);
    }
    if (dimension < 0) {
      if (values.empty()) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": no vector components");
      }
      dimension = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != dimension) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dimension) + " components, found " +
                            std::to_string(values.size()));
    }
    rows.emplace_back(std::move(token), std::move(values));
  }
  if (rows.empty()) throw ValidationError("embeddings file is empty: " + path);

  EmbeddingTable table(dimension, oov_seed);
  for (auto &[token, values] : rows) {
    table.Append(token, Eigen::Map<Eigen::VectorXd>(values.data(), dimension));
  }
  table.UpdateMedianNorm();
  return table;
}

}  // namespace mdbt
