#pragma once

#include <map>
#include <string>
#include <vector>

#include "otml/data.hpp"
#include "otml/eval.hpp"
#include "otml/losses.hpp"
#include "otml/trainer.hpp"

namespace otml {

using KeyValues = std::map<std::string, std::string>;

// Line-oriented key=value text. Blank lines and lines starting with '#' are
// skipped; duplicate keys are an error naming the key.
KeyValues parse_key_values(const std::string& text);
std::string serialize_key_values(const KeyValues& kv);

// Shared flag-value parsers: 'from:to,from:to' transition pairs and plain
// comma-separated integer lists.
std::vector<std::pair<int, int>> parse_transition_map(const std::string& text);
std::vector<int> parse_int_list_arg(const std::string& text);

struct DataSpec {
  std::string file;       // empty selects the synthetic source
  std::string test_file;  // empty: synth test split, or the train file itself
  int synth_classes = 5;
  int synth_per_class = 40;
  int synth_test_per_class = 20;
  int synth_dim = 8;
  double synth_separation = 4.0;
  std::uint64_t synth_seed = 1;
};

struct EvalSpec {
  std::vector<int> ks = {1, 2, 4};
  int probe_epochs = 200;
  double probe_lr = 0.5;
  std::uint64_t kmeans_seed = 1;
  int kmeans_iters = 100;
};

struct ExperimentConfig {
  DataSpec data;
  NoiseSpec noise;
  LossConfig loss;
  // Staging copies of the discrepancy knobs, kept even when no discrepancy
  // is configured so serialization stays total; resolve_config mirrors them
  // into loss.discrepancy when one is selected.
  double sigma = 0.05;
  SinkhornConfig sinkhorn;
  ModelConfig model;        // input_dim stays 0 until the dataset is seen
  OptimizerConfig opt;
  EvalSpec eval;
  int batch_size = 0;  // 0: num_classes * r once the dataset is known
  int r = 0;           // 0: 10 for triplet or no local loss, 2 for the pair losses
  std::string output_path = "results.csv";
  std::string checkpoint_path;  // empty: the trained model is not saved
  std::uint64_t seed = 1;
};

// Applies defaults (per-family where the value depends on the loss choice),
// validates, and rejects unknown keys; every error names the offending key.
ExperimentConfig resolve_config(const KeyValues& kv);

// Emits every field explicitly, so resolve(parse(serialize(c))) == c.
KeyValues config_to_key_values(const ExperimentConfig& cfg);

// Reads either a plain config file or a results file produced by the train
// command (first line "# otml-results"): in the latter case the resolved
// config lines of the header are extracted and result lines are ignored.
KeyValues load_config_key_values(const std::string& path);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace otml
