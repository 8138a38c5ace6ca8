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

#ifndef MDBT_COMMON_H_
#define MDBT_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mdbt {

// Raised for malformed or inconsistent inputs (files, configs, ontology
// terms). The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a computation cannot proceed (non-finite loss, bad gradient).
// The CLI maps it to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercases, splits on whitespace and strips leading/trailing punctuation
// from every token. Tokens that are pure punctuation are dropped.
std::vector<std::string> Tokenize(std::string_view text);

// 64-bit FNV-1a. Stable across platforms; used for ontology/embedding
// fingerprints and for seeding out-of-vocabulary vectors.
uint64_t Fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

std::string HexDigest(uint64_t value);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace mdbt

#endif  // MDBT_COMMON_H_
