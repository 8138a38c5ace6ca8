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

#include "mdbt/params.h"

#include <random>
#include <stdexcept>

namespace mdbt {

ParameterStore::ParameterStore(const ParameterStore &other) { *this = other; }

ParameterStore &ParameterStore::operator=(const ParameterStore &other) {
  if (this == &other) return *this;
  params_.clear();
  for (const auto &p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
  return *this;
}

int ParameterStore::Add(const std::string &name, Eigen::Index rows, Eigen::Index cols,
                        ParamKind kind, ParamGroup group) {
  if (IndexOf(name) >= 0) throw std::logic_error("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->kind = kind;
  p->group = group;
  p->value = ad::Matrix::Zero(rows, cols);
  p->grad = ad::Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

int ParameterStore::IndexOf(const std::string &name) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i]->name == name) return static_cast<int>(i);
  }
  return -1;
}

void ParameterStore::Initialize(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto &p : params_) {
    if (p->kind == ParamKind::kBias) {
      p->value.setZero();
    } else {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value(i) = normal(rng);
    }
  }
  ZeroGrad();
}

void ParameterStore::ZeroGrad() {
  for (auto &p : params_) p->grad.setZero();
}

size_t ParameterStore::CountScalars() const {
  size_t n = 0;
  for (const auto &p : params_) n += static_cast<size_t>(p->value.size());
  return n;
}

std::map<std::string, size_t> ParameterStore::CountByModule() const {
  std::map<std::string, size_t> counts;
  for (const auto &p : params_) {
    counts[p->name.substr(0, p->name.find('.'))] += static_cast<size_t>(p->value.size());
  }
  return counts;
}

BoundParams::BoundParams(ad::Tape &tape, ParameterStore &store, bool trainable) {
  vars_.reserve(store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter &p = store.at(static_cast<int>(i));
    vars_.push_back(tape.Leaf(&p.value, trainable ? &p.grad : nullptr));
  }
}

}  // namespace mdbt
