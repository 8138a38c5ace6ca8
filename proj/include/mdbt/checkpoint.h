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

#ifndef MDBT_CHECKPOINT_H_
#define MDBT_CHECKPOINT_H_

#include <string>

#include "mdbt/model.h"
#include "mdbt/ontology.h"
#include "mdbt/training.h"

namespace mdbt {

// A trained tracker plus what it was trained against. The config is stored
// verbatim; ontology and embedding hashes guard against silent drift.
struct Checkpoint {
  TrainConfig config;
  std::string ontology_hash;
  std::string embedding_hash;
  ParameterStore params;
};

// Hash of the embedding file's bytes.
std::string EmbeddingFileHash(const std::string &path);

void SaveCheckpoint(const std::string &path, const TrainConfig &config, const BeliefTracker &model,
                    const std::string &ontology_hash, const std::string &embedding_hash);
Checkpoint LoadCheckpoint(const std::string &path);

// Rebuilds the tracker and copies the stored tensors in, checking every name
// and shape.
BeliefTracker RestoreModel(const Checkpoint &checkpoint);

// Throws ValidationError when the ontology fingerprint differs.
void CheckOntology(const Checkpoint &checkpoint, const Ontology &ontology);

}  // namespace mdbt

#endif  // MDBT_CHECKPOINT_H_
