/*
 * Copyright 2026 The seqfactor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEQFACTOR_PIPELINE_H_
#define SEQFACTOR_PIPELINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seqfactor/common.h"
#include "seqfactor/context.h"
#include "seqfactor/evaluation.h"
#include "seqfactor/features.h"
#include "seqfactor/predictor.h"
#include "seqfactor/solver.h"
#include "seqfactor/synth.h"

namespace seqfactor {

struct PipelineConfig {
  std::string events_path;
  std::string features_path;
  std::string attributes_path;  // optional
  std::string out_dir = "out";

  Hyperparams solver;
  std::string tau_unit = "week";  // day | week | month (30 days)
  int num_units = 52;
  int64_t origin_day = 0;
  TimeMapping time_mapping = TimeMapping::kCyclic;
  SimilarityBasis similarity = SimilarityBasis::kFeaturesAndHistory;

  int window = 3;  // N
  double train_fraction = 0.7;
  SplitMode split_mode = SplitMode::kWindow;
  PairMode pair_mode = PairMode::kAll;

  TrainConfig predictor;
  bool standardize = true;
  Averaging averaging = Averaging::kMacro;

  // Derived-feature blocks fed to the classifier.
  bool use_inst = true;  // cluster memberships
  bool use_rep = true;   // feature and service representations
  bool use_feat = true;  // temporal and functional pair interactions

  uint64_t seed = 0;
  SynthConfig synth;

  TimeBinning binning() const;
  void validate() const;
};

// Applies one `key = value` setting. Throws ConfigError on unknown keys or
// unparsable values.
void apply_setting(PipelineConfig& cfg, const std::string& key,
                   const std::string& value);
// Flat key-value text with `#` comments.
void apply_config_text(PipelineConfig& cfg, const std::string& text);
PipelineConfig load_config(const std::string& path);

// Every setting that influences results, one `key=value` per line in key
// order. Paths are excluded.
std::string canonical_config(const PipelineConfig& cfg);
// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

// Seeds for the random draws of each stage, all derived from cfg.seed.
struct StageSeeds {
  uint64_t split;
  uint64_t fit;
  uint64_t train;
  uint64_t markov;
  uint64_t baseline;
};
StageSeeds stage_seeds(uint64_t seed);

struct PipelineInputs {
  std::vector<RawEvent> events;
  std::vector<std::string> individual_ids;
  FeatureMatrix features;
  std::vector<NamedAttribute> attributes;  // per individual
};

PipelineInputs inputs_from_synth(const SynthDataset& data);
// Reads the configured CSVs. Individuals are taken from the features file.
PipelineInputs read_inputs(const PipelineConfig& cfg);

struct BuildOutput {
  ServiceCatalog catalog;
  std::vector<std::string> individual_ids;
  FeatureMatrix features;
  std::vector<NamedAttribute> attributes;  // per individual
  ContextMatrices ctx;
  WindowedDataset windows;
  std::vector<bool> is_train;
};

BuildOutput run_build(const PipelineInputs& in, const PipelineConfig& cfg);

FitResult run_fit(const BuildOutput& b, const PipelineConfig& cfg);

struct DerivedFeatures {
  FeatureLayout layout;
  Matrix Z;  // one row per window, masked blocks zeroed
};

DerivedFeatures run_derive(const BuildOutput& b, const FactorSet& f,
                           const PipelineConfig& cfg);

// Per-column affine map fitted on training rows. Constant columns map to 0.
struct Standardizer {
  Vector mean;
  Vector scale;  // 1 / std, or 0 for constant columns

  static Standardizer identity(int width);
  static Standardizer fit(const Matrix& Z);
  Matrix apply(const Matrix& Z) const;
};

struct TrainedModel {
  Network network;
  Standardizer standardizer;
  std::vector<FoldMetrics> folds;
  std::vector<double> epoch_loss;
};

struct SplitData {
  Matrix train_rows;
  std::vector<int> train_labels;
  Matrix test_rows;
  std::vector<int> test_labels;
  std::vector<int> test_index;  // window indices of test rows
};

SplitData split_rows(const Matrix& Z, const BuildOutput& b);

// With cross_validate false only the final network is fitted; it equals the
// network fitted with cross validation bit for bit.
TrainedModel run_train(const Matrix& Z, const BuildOutput& b,
                       const PipelineConfig& cfg, bool cross_validate = true);

std::vector<int> predict_test(const TrainedModel& model, const Matrix& Z,
                              const BuildOutput& b);

struct EvalReport {
  MetricsReport replete;
  MetricsReport markov;
  MetricsReport one_hot;
  BiasReport bias;
  std::vector<int> predictions;  // factor-feature classifier, test windows
  std::vector<int> labels;
};

EvalReport run_eval(const BuildOutput& b, const TrainedModel& model,
                    const Matrix& Z, const PipelineConfig& cfg);

struct AblationRow {
  std::string table;  // "derived" or "objective"
  // derived table: inst, rep, feat. objective table: ind, temp, func.
  bool a = true;
  bool b = true;
  bool c = true;
  MetricsReport metrics;
};

// The seven rows of each table: singletons, then the pairs, then all
// components.
std::vector<AblationRow> run_ablation(const BuildOutput& b,
                                      const PipelineConfig& cfg);

struct PipelineResult {
  BuildOutput build;
  FitResult fit;
  DerivedFeatures derived;
  TrainedModel model;
  EvalReport eval;
};

PipelineResult run_pipeline(const PipelineInputs& in,
                            const PipelineConfig& cfg);

// Upper bound on worker threads from SEQFACTOR_THREADS (default 1).
int thread_limit();

}  // namespace seqfactor

#endif  // SEQFACTOR_PIPELINE_H_
