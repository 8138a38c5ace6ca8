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

// Command-line front end: train, evaluate, track, synth, gradcheck.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdbt/checkpoint.h"
#include "mdbt/common.h"
#include "mdbt/corpus.h"
#include "mdbt/embeddings.h"
#include "mdbt/evaluation.h"
#include "mdbt/model.h"
#include "mdbt/ontology.h"
#include "mdbt/script.h"
#include "mdbt/synthetic.h"
#include "mdbt/training.h"

namespace fs = std::filesystem;
using namespace mdbt;

namespace {

// Reads either a flat JSON object or "key = value" lines ('#' comments).
class KeyValueConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App *, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
    std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<CLI::ConfigItem> items;
    if (first != std::string::npos && text[first] == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error &e) {
        throw CLI::ConversionError(std::string("config file: ") + e.what());
      }
      for (const auto &[key, value] : j.items()) {
        if (value.is_object() || value.is_array() || value.is_null()) {
          throw CLI::ConversionError("config file: key '" + key + "' must be a scalar");
        }
        CLI::ConfigItem item;
        item.name = key;
        item.inputs = {value.is_string() ? value.get<std::string>() : value.dump()};
        items.push_back(std::move(item));
      }
      return items;
    }
    std::istringstream lines(text);
    std::string line;
    for (int number = 1; std::getline(lines, line); ++number) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto begin = line.find_first_not_of(" \t\r");
      if (begin == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw CLI::ConversionError("config file line " + std::to_string(number) +
                                   ": expected key = value");
      }
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\"");
        const auto e = s.find_last_not_of(" \t\r\"");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      CLI::ConfigItem item;
      item.name = trim(line.substr(0, eq));
      item.inputs = {trim(line.substr(eq + 1))};
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct RunConfig {
  // Paths.
  std::string corpus, ontology, embeddings, checkpoint, dialogue;
  std::string output_dir = ".";
  std::string split = "test";

  // Model and training; unset values fall back to per-command defaults.
  std::string encoder = "cnn";
  std::string domain_update = "memory-rnn";
  std::string slot_update = "memory-rnn";
  std::string belief_mode = "recurrent";
  std::optional<int> embedding_dim, hidden_dim;
  std::optional<double> dropout;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 600;
  int patience = 0;
  bool domain_loss_negatives = true;
  bool similarity_dropout = true;
  std::string init_scale = "unit";
  bool slot_update_identity_init = false;
  uint64_t seed = 1;

  // Command switches.
  bool interactive = false;
  bool uniform_baseline = false;

  // synth.
  int domains = 3, slots_per_domain = 3, values_per_slot = 5;
  int train_dialogues = 200, dev_dialogues = 50, test_dialogues = 50;
  int min_turns = 2, max_turns = 5;

  // gradcheck.
  double epsilon = 1e-5;
  double tolerance = 1e-4;

  nlohmann::ordered_json ToJson() const {
    auto opt = [](const auto &v) -> nlohmann::json {
      if (v) return *v;
      return nullptr;
    };
    return {{"corpus", corpus},
            {"ontology", ontology},
            {"embeddings", embeddings},
            {"checkpoint", checkpoint},
            {"dialogue", dialogue},
            {"output_dir", output_dir},
            {"split", split},
            {"encoder", encoder},
            {"domain_update", domain_update},
            {"slot_update", slot_update},
            {"belief_mode", belief_mode},
            {"embedding_dim", opt(embedding_dim)},
            {"hidden_dim", opt(hidden_dim)},
            {"dropout", opt(dropout)},
            {"learning_rate", learning_rate},
            {"batch_size", batch_size},
            {"epochs", epochs},
            {"patience", patience},
            {"domain_loss_negatives", domain_loss_negatives},
            {"similarity_dropout", similarity_dropout},
            {"init_scale", init_scale},
            {"slot_update_identity_init", slot_update_identity_init},
            {"seed", seed},
            {"interactive", interactive},
            {"uniform_baseline", uniform_baseline},
            {"domains", domains},
            {"slots_per_domain", slots_per_domain},
            {"values_per_slot", values_per_slot},
            {"train_dialogues", train_dialogues},
            {"dev_dialogues", dev_dialogues},
            {"test_dialogues", test_dialogues},
            {"min_turns", min_turns},
            {"max_turns", max_turns},
            {"epsilon", epsilon},
            {"tolerance", tolerance}};
  }
};

void Require(const std::string &value, const std::string &key) {
  if (value.empty()) throw ValidationError("missing required setting --" + key);
}

void RequireFile(const std::string &path, const std::string &key) {
  Require(path, key);
  if (!fs::is_regular_file(path)) throw ValidationError(key + " file not found: " + path);
}

std::string CheckpointPath(const RunConfig &rc) {
  return rc.checkpoint.empty() ? (fs::path(rc.output_dir) / "checkpoint.json").string()
                               : rc.checkpoint;
}

TrainConfig MakeTrainConfig(const RunConfig &rc, int embedding_dim) {
  TrainConfig c;
  c.model.encoder = ParseEncoderKind(rc.encoder);
  c.model.domain_update = ParseUpdateVariant(rc.domain_update);
  c.model.slot_update = ParseUpdateVariant(rc.slot_update);
  c.model.mode = ParseBeliefMode(rc.belief_mode);
  c.model.embedding_dim = embedding_dim;
  c.model.hidden_dim = rc.hidden_dim.value_or(c.model.hidden_dim);
  c.model.dropout = rc.dropout.value_or(c.model.dropout);
  c.learning_rate = rc.learning_rate;
  c.batch_size = rc.batch_size;
  c.epochs = rc.epochs;
  c.patience = rc.patience;
  c.domain_loss_negatives = rc.domain_loss_negatives;
  c.model.similarity_dropout = rc.similarity_dropout;
  c.init_scale = ParseInitScale(rc.init_scale);
  c.slot_update_identity_init = rc.slot_update_identity_init;
  c.seed = rc.seed;
  c.Validate();
  return c;
}

const std::vector<Dialogue> &SelectSplit(const CorpusSplit &corpus, const std::string &split) {
  if (split == "train") return corpus.train;
  if (split == "dev") return corpus.dev;
  if (split == "test") return corpus.test;
  throw ValidationError("unknown split '" + split + "' (expected train, dev or test)");
}

int CmdTrain(const RunConfig &rc) {
  RequireFile(rc.ontology, "ontology");
  RequireFile(rc.corpus, "corpus");
  RequireFile(rc.embeddings, "embeddings");
  Ontology ontology = LoadOntology(rc.ontology);
  CorpusSplit corpus = LoadCorpus(rc.corpus, ontology);
  EmbeddingTable table = LoadEmbeddings(rc.embeddings, rc.seed);
  if (rc.embedding_dim && *rc.embedding_dim != table.dimension()) {
    throw ValidationError("embedding_dim " + std::to_string(*rc.embedding_dim) + " does not match " +
                          rc.embeddings + " (dimension " + std::to_string(table.dimension()) + ")");
  }
  TrainConfig config = MakeTrainConfig(rc, table.dimension());

  fs::create_directories(rc.output_dir);
  const std::string checkpoint = CheckpointPath(rc);
  const std::string log_path = (fs::path(rc.output_dir) / "train_log.tsv").string();
  WriteFile((fs::path(rc.output_dir) / "run_config.json").string(), rc.ToJson().dump(2) + "\n");
  std::ofstream log(log_path);
  if (!log) throw RuntimeError("cannot write " + log_path);

  TrainResult result = Train(corpus, ontology, table, config, [&](const EpochLog &epoch) {
    log << epoch.ToTsv() << "\n" << std::flush;
    std::cout << epoch.ToTsv() << "\n" << std::flush;
  });
  SaveCheckpoint(checkpoint, config, result.model, ontology.Fingerprint(),
                 EmbeddingFileHash(rc.embeddings));
  std::cerr << "best epoch " << result.best_epoch << ", dev joint " << result.best_dev_joint
            << "; checkpoint written to " << checkpoint << "\n";
  return 0;
}

void WriteReport(const RunConfig &rc, const MetricReport &report) {
  fs::create_directories(rc.output_dir);
  WriteFile((fs::path(rc.output_dir) / "report.tsv").string(), report.ToTsv());
  WriteFile((fs::path(rc.output_dir) / "report.json").string(), report.ToJson());
  std::cout << report.ToTsv();
}

int CmdEvaluate(const RunConfig &rc) {
  RequireFile(rc.ontology, "ontology");
  RequireFile(rc.corpus, "corpus");
  Ontology ontology = LoadOntology(rc.ontology);
  CorpusSplit corpus = LoadCorpus(rc.corpus, ontology);
  const auto &dialogues = SelectSplit(corpus, rc.split);
  if (dialogues.empty()) throw ValidationError("split '" + rc.split + "' is empty");

  if (rc.uniform_baseline) {
    std::vector<DialogueLabels> labels;
    for (const auto &d : dialogues) labels.push_back(SplitLabels(d, ontology));
    WriteReport(rc, UniformBaseline(ontology, labels, rc.seed));
    return 0;
  }

  const std::string checkpoint_path = CheckpointPath(rc);
  RequireFile(checkpoint_path, "checkpoint");
  RequireFile(rc.embeddings, "embeddings");
  Checkpoint checkpoint = LoadCheckpoint(checkpoint_path);
  CheckOntology(checkpoint, ontology);
  if (EmbeddingFileHash(rc.embeddings) != checkpoint.embedding_hash) {
    throw ValidationError("embedding file hash mismatch: " + rc.embeddings +
                          " differs from the file the checkpoint was trained with");
  }
  EmbeddingTable table = LoadEmbeddings(rc.embeddings, checkpoint.config.seed);
  BeliefTracker model = RestoreModel(checkpoint);
  OntologyTerms terms = OntologyTerms::Build(ontology, table);
  WriteReport(rc, EvaluatePrepared(model, ontology, terms, Prepare(dialogues, ontology, table)));
  return 0;
}

// Loaded model plus everything needed to track raw turns.
struct Tracker {
  Ontology ontology;
  EmbeddingTable table;
  OntologyTerms terms;
  BeliefTracker model;

  TurnBelief Last(const std::vector<Turn> &turns) {
    std::vector<EmbeddedTurn> embedded;
    for (const auto &t : turns) embedded.push_back(EmbedTurn(t, table));
    return model.Track(ontology, terms, embedded).turns.back();
  }
};

Tracker LoadTracker(const RunConfig &rc) {
  RequireFile(rc.ontology, "ontology");
  RequireFile(rc.embeddings, "embeddings");
  const std::string checkpoint_path = CheckpointPath(rc);
  RequireFile(checkpoint_path, "checkpoint");
  Ontology ontology = LoadOntology(rc.ontology);
  Checkpoint checkpoint = LoadCheckpoint(checkpoint_path);
  CheckOntology(checkpoint, ontology);
  EmbeddingTable table = LoadEmbeddings(rc.embeddings, checkpoint.config.seed);
  OntologyTerms terms = OntologyTerms::Build(ontology, table);
  return {std::move(ontology), std::move(table), std::move(terms), RestoreModel(checkpoint)};
}

void PrintBelief(const Ontology &ontology, const TurnBelief &belief, bool active_only,
                 std::ostream &out) {
  char buf[32];
  for (int d = 0; d < ontology.num_domains(); ++d) {
    const bool active = belief.domains[d] >= kDomainThreshold;
    if (active_only && !active) continue;
    std::snprintf(buf, sizeof buf, "%.4f", belief.domains[d]);
    out << "domain\t" << ontology.domains()[d].name << "\t" << buf << "\t"
        << (active ? "active" : "inactive") << "\n";
  }
  for (int s = 0; s < ontology.num_slots(); ++s) {
    Eigen::Index top;
    const double p = belief.slots[s].maxCoeff(&top);
    std::snprintf(buf, sizeof buf, "%.4f", p);
    out << "slot\t" << ontology.slot(s).domain_name << "/" << ontology.slot(s).slot_name << "\t"
        << ontology.Candidates(s)[top] << "\t" << buf << "\n";
  }
}

int CmdTrackFile(const RunConfig &rc) {
  RequireFile(rc.dialogue, "dialogue");
  Tracker tracker = LoadTracker(rc);
  std::vector<std::string> warnings;
  std::vector<Turn> turns = ParseScript(ReadFile(rc.dialogue), &warnings);
  for (const auto &w : warnings) std::cerr << "warning: " << rc.dialogue << ": " << w << "\n";
  if (turns.empty()) throw ValidationError(rc.dialogue + ": no complete turns");
  std::vector<EmbeddedTurn> embedded;
  for (const auto &t : turns) embedded.push_back(EmbedTurn(t, tracker.table));
  DialogueBelief belief = tracker.model.Track(tracker.ontology, tracker.terms, embedded);
  for (size_t t = 0; t < turns.size(); ++t) {
    std::cout << "== turn " << t + 1 << "\n"
              << "system: " << turns[t].system << "\n"
              << "user: " << turns[t].user << "\n";
    PrintBelief(tracker.ontology, belief.turns[t], /*active_only=*/false, std::cout);
  }
  return 0;
}

int CmdTrackInteractive(const RunConfig &rc) {
  Tracker tracker = LoadTracker(rc);
  std::vector<Turn> turns;
  std::string system, user;
  auto prompt = [](const char *who, std::string &line) {
    std::cout << who << "> " << std::flush;
    if (!std::getline(std::cin, line)) return false;
    return true;
  };
  for (;;) {
    if (!prompt("system", system) || system == ":quit") break;
    if (system == ":reset") {
      turns.clear();
      std::cout << "(belief state cleared)\n";
      continue;
    }
    if (!prompt("user", user) || user == ":quit") break;
    if (user == ":reset") {
      turns.clear();
      std::cout << "(belief state cleared)\n";
      continue;
    }
    turns.push_back(MakeTurn(system, user));
    std::cout << "== turn " << turns.size() << "\n";
    PrintBelief(tracker.ontology, tracker.Last(turns), /*active_only=*/true, std::cout);
  }
  std::cout << "\n";
  return 0;
}

int CmdSynth(const RunConfig &rc) {
  SyntheticSpec spec;
  spec.num_domains = rc.domains;
  spec.slots_per_domain = rc.slots_per_domain;
  spec.values_per_slot = rc.values_per_slot;
  spec.train_dialogues = rc.train_dialogues;
  spec.dev_dialogues = rc.dev_dialogues;
  spec.test_dialogues = rc.test_dialogues;
  spec.min_turns = rc.min_turns;
  spec.max_turns = rc.max_turns;
  SyntheticCorpus data = GenerateSynthetic(spec, rc.seed);
  EmbeddingTable table = SyntheticEmbeddings(data, rc.embedding_dim.value_or(64), rc.seed);
  fs::create_directories(rc.output_dir);
  const fs::path dir(rc.output_dir);
  SaveCorpus(data.corpus, (dir / "corpus.json").string());
  SaveOntology(data.ontology, (dir / "ontology.json").string());
  table.Save((dir / "embeddings.txt").string());
  std::cout << "wrote " << (dir / "corpus.json").string() << ", "
            << (dir / "ontology.json").string() << ", " << (dir / "embeddings.txt").string()
            << "\n";
  return 0;
}

int CmdGradcheck(const RunConfig &rc) {
  if (rc.dropout.value_or(0.0) > 0) {
    throw ValidationError(
        "gradcheck refuses to run with dropout " + std::to_string(*rc.dropout) +
        ": dropout masks make the loss stochastic, so finite differences cannot match the "
        "analytic gradient; set --dropout 0");
  }
  // Tiny problem: 1 domain, 2 slots, 2 values, one 2-turn dialogue.
  SyntheticSpec spec;
  spec.num_domains = 1;
  spec.slots_per_domain = 2;
  spec.values_per_slot = 2;
  spec.train_dialogues = 1;
  spec.dev_dialogues = spec.test_dialogues = 0;
  spec.min_turns = spec.max_turns = 2;
  spec.filler_probability = 0;
  SyntheticCorpus data = GenerateSynthetic(spec, rc.seed);
  RunConfig tiny = rc;
  tiny.hidden_dim = rc.hidden_dim.value_or(8);
  tiny.dropout = 0.0;
  TrainConfig config = MakeTrainConfig(tiny, rc.embedding_dim.value_or(10));
  EmbeddingTable table = SyntheticEmbeddings(data, config.model.embedding_dim, rc.seed);
  BeliefTracker model = InitParams(config);
  OntologyTerms terms = OntologyTerms::Build(data.ontology, table);
  auto batch = Prepare(data.corpus.train, data.ontology, table);
  GradientCheckReport report = GradientCheck(model, terms, batch, config, rc.epsilon);
  std::cout.precision(6);
  for (const auto &[name, err] : report.parameters) {
    std::cout << "parameter\t" << name << "\t" << err << "\n";
  }
  std::cout << "scalars_checked\t" << report.scalars_checked << "\n"
            << "worst_parameter\t" << report.worst_parameter << "\n"
            << "max_relative_error\t" << report.max_relative_error << "\n";
  if (!(report.max_relative_error < rc.tolerance)) {
    std::cerr << "gradient check failed: max relative error " << report.max_relative_error
              << " >= " << rc.tolerance << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multi-domain belief tracker"};
  app.config_formatter(std::make_shared<KeyValueConfig>());
  app.set_config("--config", "", "Config file: flat JSON object or key = value lines");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig rc;
  auto opt = [&](const std::string &key, auto &target, const std::string &help) {
    return app.add_option("--" + key, target, help)->configurable();
  };
  opt("corpus", rc.corpus, "Corpus JSON");
  opt("ontology", rc.ontology, "Ontology JSON");
  opt("embeddings", rc.embeddings, "Word embeddings (word v1 ... vD per line)");
  opt("checkpoint", rc.checkpoint, "Checkpoint path (default <output_dir>/checkpoint.json)");
  opt("dialogue", rc.dialogue, "Dialogue script for track");
  opt("output_dir", rc.output_dir, "Directory for outputs");
  opt("split", rc.split, "Split to evaluate: train, dev or test");
  opt("encoder", rc.encoder, "bilstm or cnn");
  opt("domain_update", rc.domain_update, "plain-rnn, memory-rnn or lstm");
  opt("slot_update", rc.slot_update, "plain-rnn, memory-rnn or lstm");
  opt("belief_mode", rc.belief_mode, "recurrent or pass-through");
  opt("embedding_dim", rc.embedding_dim, "D (train: must match the embeddings)");
  opt("hidden_dim", rc.hidden_dim, "L (default 64; gradcheck 8)");
  opt("dropout", rc.dropout, "Dropout rate (default 0.5; gradcheck requires 0)");
  opt("learning_rate", rc.learning_rate, "Adam learning rate");
  opt("batch_size", rc.batch_size, "Dialogues per batch");
  opt("epochs", rc.epochs, "Training epochs");
  opt("patience", rc.patience, "Early-stopping patience in epochs (0 = off)");
  opt("domain_loss_negatives", rc.domain_loss_negatives, "Include the (1-t) log(1-P) term");
  opt("similarity_dropout", rc.similarity_dropout, "Also drop out similarity vectors");
  opt("init_scale", rc.init_scale, "Weight init: unit (Normal(0,1)) or fan-in (Normal(0,1/fan_in))");
  opt("slot_update_identity_init", rc.slot_update_identity_init,
      "Start the slot update cell as a logit accumulator");
  opt("seed", rc.seed, "Seed for every random draw");
  opt("uniform_baseline", rc.uniform_baseline, "evaluate: score uniform sampling instead");
  opt("domains", rc.domains, "synth: number of domains");
  opt("slots_per_domain", rc.slots_per_domain, "synth: slots per domain");
  opt("values_per_slot", rc.values_per_slot, "synth: values per slot");
  opt("train_dialogues", rc.train_dialogues, "synth: train dialogues");
  opt("dev_dialogues", rc.dev_dialogues, "synth: dev dialogues");
  opt("test_dialogues", rc.test_dialogues, "synth: test dialogues");
  opt("min_turns", rc.min_turns, "synth: minimum turns per dialogue");
  opt("max_turns", rc.max_turns, "synth: maximum turns per dialogue");
  opt("epsilon", rc.epsilon, "gradcheck: finite-difference step");
  opt("tolerance", rc.tolerance, "gradcheck: maximum accepted relative error");

  auto *train = app.add_subcommand("train", "Train a tracker; writes checkpoint and epoch log");
  auto *evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a corpus split");
  auto *track = app.add_subcommand("track", "Print per-turn beliefs for a dialogue");
  track->add_flag("--interactive", rc.interactive, "Read turns from the terminal");
  auto *synth = app.add_subcommand("synth", "Write a synthetic corpus, ontology and embeddings");
  auto *gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  for (auto *sub : {train, evaluate, track, synth, gradcheck}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    std::cerr << "# config " << rc.ToJson().dump() << "\n";
    if (*train) return CmdTrain(rc);
    if (*evaluate) return CmdEvaluate(rc);
    if (*track) return rc.interactive ? CmdTrackInteractive(rc) : CmdTrackFile(rc);
    if (*synth) return CmdSynth(rc);
    if (*gradcheck) return CmdGradcheck(rc);
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
