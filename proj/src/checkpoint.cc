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

#include "mdbt/checkpoint.h"

#include <sstream>

#include "json.hpp"
#include "mdbt/common.h"

namespace mdbt {

namespace {
constexpr const char *kFormat = "mdbt-checkpoint-1";
}

std::string EmbeddingFileHash(const std::string &path) {
  return HexDigest(Fnv1a64(ReadFile(path)));
}

void SaveCheckpoint(const std::string &path, const TrainConfig &config, const BeliefTracker &model,
                    const std::string &ontology_hash, const std::string &embedding_hash) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["config"] = config.ToJson();
  j["ontology_hash"] = ontology_hash;
  j["embedding_hash"] = embedding_hash;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  const ParameterStore &store = model.params();
  for (size_t i = 0; i < store.size(); ++i) {
    const Parameter &p = store.at(static_cast<int>(i));
    std::vector<double> data(p.value.data(), p.value.data() + p.value.size());
    tensors.push_back({{"name", p.name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"data", data}});
  }
  j["parameters"] = std::move(tensors);
  // nlohmann prints doubles with enough digits to round-trip exactly.
  WriteFile(path, j.dump(1) + "\n");
}

Checkpoint LoadCheckpoint(const std::string &path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error &e) {
    throw ValidationError(path + ": not a checkpoint (" + e.what() + ")");
  }
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw ValidationError(path + ": unknown checkpoint format");
  }
  Checkpoint c;
  c.config = TrainConfig::FromJson(j.at("config"));
  try {
    c.ontology_hash = j.at("ontology_hash").get<std::string>();
    c.embedding_hash = j.at("embedding_hash").get<std::string>();
    BeliefTracker shape(c.config.model);
    c.params = shape.params();
    for (const auto &t : j.at("parameters")) {
      const std::string name = t.at("name").get<std::string>();
      const int index = c.params.IndexOf(name);
      if (index < 0) throw ValidationError(path + ": unexpected parameter " + name);
      Parameter &p = c.params.at(index);
      const auto rows = t.at("rows").get<Eigen::Index>(), cols = t.at("cols").get<Eigen::Index>();
      const auto data = t.at("data").get<std::vector<double>>();
      if (rows != p.value.rows() || cols != p.value.cols() ||
          static_cast<Eigen::Index>(data.size()) != rows * cols) {
        std::ostringstream msg;
        msg << path << ": parameter " << name << " has shape " << rows << "x" << cols
            << ", expected " << p.value.rows() << "x" << p.value.cols();
        throw ValidationError(msg.str());
      }
      p.value = Eigen::Map<const ad::Matrix>(data.data(), rows, cols);
    }
    if (j.at("parameters").size() != c.params.size()) {
      throw ValidationError(path + ": checkpoint is missing parameters");
    }
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(path + ": malformed checkpoint (" + e.what() + ")");
  }
  return c;
}

BeliefTracker RestoreModel(const Checkpoint &checkpoint) {
  BeliefTracker model(checkpoint.config.model);
  ParameterStore &store = model.params();
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter &p = store.at(static_cast<int>(i));
    const int index = checkpoint.params.IndexOf(p.name);
    if (index < 0) throw ValidationError("checkpoint lacks parameter " + p.name);
    p.value = checkpoint.params.at(index).value;
  }
  return model;
}

void CheckOntology(const Checkpoint &checkpoint, const Ontology &ontology) {
  const std::string actual = ontology.Fingerprint();
  if (actual != checkpoint.ontology_hash) {
    throw ValidationError("ontology hash mismatch: checkpoint was trained on " +
                          checkpoint.ontology_hash + ", got " + actual);
  }
}

}  // namespace mdbt
