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

#ifndef MDBT_PARAMS_H_
#define MDBT_PARAMS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mdbt/autodiff.h"

namespace mdbt {

enum class ParamKind { kWeight, kBias };

// Which objective trains a parameter. The two groups are disjoint: the
// domain loss only reaches kDomain parameters and the slot-value loss only
// reaches kSlotValue parameters.
enum class ParamGroup { kDomain, kSlotValue };

struct Parameter {
  std::string name;
  ParamKind kind;
  ParamGroup group;
  ad::Matrix value;
  ad::Matrix grad;
};

// Ordered registry of every trainable tensor. Enumeration order is the
// registration order, which is fixed by the model configuration alone.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore &other);
  ParameterStore &operator=(const ParameterStore &other);

  int Add(const std::string &name, Eigen::Index rows, Eigen::Index cols, ParamKind kind,
          ParamGroup group);

  size_t size() const { return params_.size(); }
  Parameter &at(int index) { return *params_.at(index); }
  const Parameter &at(int index) const { return *params_.at(index); }
  int IndexOf(const std::string &name) const;  // -1 if absent

  // Weights ~ Normal(0, 1) from a seeded generator, biases = 0.
  void Initialize(uint64_t seed);
  void ZeroGrad();

  // Total trainable scalars and per-module breakdown (name prefix up to the
  // first '.').
  size_t CountScalars() const;
  std::map<std::string, size_t> CountByModule() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

// Leaf vars of every parameter on one tape, indexed like the store.
class BoundParams {
 public:
  // With trainable=false the leaves carry no gradient sink.
  BoundParams(ad::Tape &tape, ParameterStore &store, bool trainable);
  ad::Var operator[](int index) const { return vars_.at(index); }

 private:
  std::vector<ad::Var> vars_;
};

}  // namespace mdbt

#endif  // MDBT_PARAMS_H_
