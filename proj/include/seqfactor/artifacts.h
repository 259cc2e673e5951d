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

#ifndef SEQFACTOR_ARTIFACTS_H_
#define SEQFACTOR_ARTIFACTS_H_

#include <string>
#include <vector>

#include "seqfactor/io.h"
#include "seqfactor/pipeline.h"

namespace seqfactor {

// On-disk stage outputs under one directory. Loaders throw
// PipelineOrderError naming the producing stage when a file is missing or
// was written under a different config hash (unless `force` is set).
class ArtifactStore {
 public:
  ArtifactStore(std::string dir, std::string config_hash, bool force);

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& file) const;

  void save_build(const BuildOutput& b) const;
  BuildOutput load_build() const;

  void save_fit(const FitResult& f) const;
  FitResult load_fit() const;

  void save_derived(const DerivedFeatures& d) const;
  Matrix load_derived() const;

  void save_model(const TrainedModel& m) const;
  TrainedModel load_model() const;

  void save_eval(const EvalReport& r, const SolveTrace& trace) const;
  void save_ablation(const std::vector<AblationRow>& rows) const;
  void save_synth(const SynthDataset& data) const;

 private:
  void check_hash(const std::string& found, const std::string& file,
                  const std::string& stage) const;
  json load(const std::string& file, const std::string& stage,
            const std::string& version) const;

  std::string dir_;
  std::string hash_;
  bool force_;
};

// Artifact file names.
inline constexpr const char* kContextFile = "context.json";
inline constexpr const char* kWindowsFile = "windows.json";
inline constexpr const char* kFactorsFile = "factors.json";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kFeaturesFile = "z.csv";
inline constexpr const char* kNetworkFile = "network.json";
inline constexpr const char* kFoldsFile = "folds.csv";
inline constexpr const char* kMetricsJson = "metrics.json";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kBiasJson = "bias.json";
inline constexpr const char* kBiasCsv = "bias.csv";
inline constexpr const char* kBiasPlotCsv = "bias_plot.csv";
inline constexpr const char* kAblationJson = "ablation.json";
inline constexpr const char* kAblationCsv = "ablation.csv";

}  // namespace seqfactor

#endif  // SEQFACTOR_ARTIFACTS_H_
