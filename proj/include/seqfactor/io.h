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

#ifndef SEQFACTOR_IO_H_
#define SEQFACTOR_IO_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "seqfactor/common.h"
#include "seqfactor/context.h"
#include "seqfactor/evaluation.h"
#include "seqfactor/features.h"
#include "seqfactor/predictor.h"
#include "seqfactor/solver.h"

namespace seqfactor {

using json = nlohmann::json;

inline constexpr const char* kFactorsVersion = "replete-factors-v1";
inline constexpr const char* kNetworkVersion = "replete-net-v1";
inline constexpr const char* kContextVersion = "replete-context-v1";
inline constexpr const char* kWindowsVersion = "replete-windows-v1";

// Table with a leading `individual_id` column and numeric columns after it.
struct IdTable {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  Matrix values;
};

// CSV readers report malformed input as InputError("<path>:<line>: ...").
std::vector<RawEvent> read_events_csv(const std::string& path);
IdTable read_id_table_csv(const std::string& path);
FeatureMatrix features_from_table(const IdTable& table,
                                  const std::string& path);

void write_events_csv(const std::string& path,
                      const std::vector<RawEvent>& events);
void write_id_table_csv(const std::string& path,
                        const std::vector<std::string>& ids,
                        const std::vector<std::string>& columns,
                        const Matrix& values);

// {name, rows, cols, row_major_values}
json matrix_to_json(const std::string& name, const Matrix& m);
Matrix matrix_from_json(const json& j);
// Looks up the container called `name` in an array of containers.
Matrix find_matrix(const json& containers, const std::string& name);

json context_to_json(const ContextMatrices& ctx);

json factors_to_json(const FactorSet& f);
FactorSet factors_from_json(const json& j);

json network_to_json(const Network& net);
Network network_from_json(const json& j);

// Report CSVs start with a `# config_hash <hash>` line when a hash is given.
void write_trace_csv(const std::string& path, const SolveTrace& trace,
                     const std::string& config_hash = "");

// Descriptor comment lines (`# block <name> <offset> <width>`) followed by
// a header and one row per window.
void write_features_csv(const std::string& path, const FeatureLayout& layout,
                        const Matrix& Z, const std::string& config_hash);
Matrix read_features_csv(const std::string& path, std::string* config_hash);

json metrics_to_json(const MetricsReport& r);
json bias_to_json(const BiasReport& r);
void write_bias_csv(const std::string& path, const BiasReport& r,
                    const std::string& config_hash = "");
// Long format for plotting: service,ratio,metric,attribute.
void write_bias_plot_csv(const std::string& path, const BiasReport& r,
                         const std::string& config_hash = "");

std::string hash_comment(const std::string& config_hash);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);

}  // namespace seqfactor

#endif  // SEQFACTOR_IO_H_
