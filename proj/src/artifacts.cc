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

#include "seqfactor/artifacts.h"

#include <filesystem>
#include <sstream>

#include "seqfactor/io.h"

namespace seqfactor {
namespace {

json terms_to_json(const ObjectiveBreakdown& t) {
  return json{{"temporal", t.temporal},     {"functional", t.functional},
              {"individual", t.individual}, {"sparsity", t.sparsity},
              {"augmented", t.augmented},   {"regularizer", t.regularizer}};
}

ObjectiveBreakdown terms_from_json(const json& j) {
  ObjectiveBreakdown t;
  t.temporal = j.at("temporal").get<double>();
  t.functional = j.at("functional").get<double>();
  t.individual = j.at("individual").get<double>();
  t.sparsity = j.at("sparsity").get<double>();
  t.augmented = j.at("augmented").get<double>();
  t.regularizer = j.at("regularizer").get<std::string>();
  return t;
}

json header(const char* version, const std::string& hash) {
  return json{{"version", version}, {"config_hash", hash}};
}

std::string metrics_row(const std::string& method, const MetricsReport& r) {
  return method + "," + format_double(r.accuracy) + "," +
         format_double(r.precision) + "," + format_double(r.recall) + "," +
         format_double(r.f1) + "\n";
}

}  // namespace

ArtifactStore::ArtifactStore(std::string dir, std::string config_hash,
                             bool force)
    : dir_(std::move(dir)), hash_(std::move(config_hash)), force_(force) {}

std::string ArtifactStore::path(const std::string& file) const {
  return (std::filesystem::path(dir_) / file).string();
}

void ArtifactStore::check_hash(const std::string& found,
                               const std::string& file,
                               const std::string& stage) const {
  if (found == hash_ || force_) return;
  throw PipelineOrderError(path(file) + " was written under config hash " +
                           found + " but the current config hashes to " +
                           hash_ + "; rerun `" + stage +
                           "` or pass --force");
}

json ArtifactStore::load(const std::string& file, const std::string& stage,
                         const std::string& version) const {
  const std::string p = path(file);
  if (!std::filesystem::exists(p))
    throw PipelineOrderError("missing " + p + "; run `" + stage + "` first");
  json j = read_json(p);
  if (j.value("version", std::string()) != version)
    throw InputError(p + ": expected version " + version);
  check_hash(j.value("config_hash", std::string()), file, stage);
  return j;
}

void ArtifactStore::save_build(const BuildOutput& b) const {
  std::filesystem::create_directories(dir_);
  json ctx = header(kContextVersion, hash_);
  ctx["services"] = b.catalog.names();
  ctx["individuals"] = b.individual_ids;
  ctx["feature_names"] = b.features.feature_names;
  json attrs = json::array();
  for (const auto& a : b.attributes)
    attrs.push_back({{"name", a.name}, {"values", a.values}});
  ctx["attributes"] = attrs;
  json mats = context_to_json(b.ctx);
  mats.push_back(matrix_to_json("X", b.features.values));
  ctx["matrices"] = mats;
  write_json(path(kContextFile), ctx);

  json win = header(kWindowsVersion, hash_);
  win["length"] = b.windows.length;
  win["row_layout"] = "individual,label,train,history...";
  json rows = json::array();
  for (size_t i = 0; i < b.windows.windows.size(); ++i) {
    const Window& w = b.windows.windows[i];
    json row = json::array({w.individual, w.label, b.is_train[i] ? 1 : 0});
    for (int s : w.history) row.push_back(s);
    rows.push_back(std::move(row));
  }
  win["windows"] = std::move(rows);
  write_json(path(kWindowsFile), win);
}

BuildOutput ArtifactStore::load_build() const {
  const json ctx = load(kContextFile, "build", kContextVersion);
  const json win = load(kWindowsFile, "build", kWindowsVersion);
  try {
    BuildOutput b;
    b.catalog = ServiceCatalog(ctx.at("services").get<std::vector<std::string>>());
    b.individual_ids = ctx.at("individuals").get<std::vector<std::string>>();
    b.features.feature_names =
        ctx.at("feature_names").get<std::vector<std::string>>();
    for (const auto& a : ctx.at("attributes"))
      b.attributes.push_back({a.at("name").get<std::string>(),
                              a.at("values").get<std::vector<int>>()});
    const json& mats = ctx.at("matrices");
    b.features.values = find_matrix(mats, "X");
    b.ctx.D = find_matrix(mats, "D");
    b.ctx.T = find_matrix(mats, "T");
    b.ctx.H = find_matrix(mats, "H");
    b.ctx.Gamma = find_matrix(mats, "Gamma");
    b.ctx.Diff = find_matrix(mats, "Diff");
    b.windows.length = win.at("length").get<int>();
    for (const auto& row : win.at("windows")) {
      Window w;
      w.individual = row.at(0).get<int>();
      w.label = row.at(1).get<int>();
      b.is_train.push_back(row.at(2).get<int>() != 0);
      for (size_t i = 3; i < row.size(); ++i)
        w.history.push_back(row.at(i).get<int>());
      b.windows.windows.push_back(std::move(w));
    }
    return b;
  } catch (const json::exception& e) {
    throw InputError(path(kContextFile) + ": " + e.what());
  }
}

void ArtifactStore::save_fit(const FitResult& f) const {
  std::filesystem::create_directories(dir_);
  json j = header(kFactorsVersion, hash_);
  j["k"] = f.factors.A.cols();
  j["m"] = f.factors.Rp.rows();
  j["matrices"] = factors_to_json(f.factors);
  json terms = json::array();
  for (const auto& t : f.trace.terms) terms.push_back(terms_to_json(t));
  j["trace"] = {{"converged", f.trace.converged},
                {"iterations_run", f.trace.iterations_run},
                {"objective", f.trace.objective},
                {"terms", terms}};
  write_json(path(kFactorsFile), j);
  write_trace_csv(path(kTraceFile), f.trace, hash_);
}

FitResult ArtifactStore::load_fit() const {
  const json j = load(kFactorsFile, "fit", kFactorsVersion);
  try {
    FitResult f;
    f.factors = factors_from_json(j.at("matrices"));
    const json& t = j.at("trace");
    f.trace.converged = t.at("converged").get<bool>();
    f.trace.iterations_run = t.at("iterations_run").get<int>();
    f.trace.objective = t.at("objective").get<std::vector<double>>();
    for (const auto& x : t.at("terms")) f.trace.terms.push_back(terms_from_json(x));
    return f;
  } catch (const json::exception& e) {
    throw InputError(path(kFactorsFile) + ": " + e.what());
  }
}

void ArtifactStore::save_derived(const DerivedFeatures& d) const {
  std::filesystem::create_directories(dir_);
  write_features_csv(path(kFeaturesFile), d.layout, d.Z, hash_);
}

Matrix ArtifactStore::load_derived() const {
  const std::string p = path(kFeaturesFile);
  if (!std::filesystem::exists(p))
    throw PipelineOrderError("missing " + p + "; run `derive` first");
  std::string found;
  Matrix Z = read_features_csv(p, &found);
  check_hash(found, kFeaturesFile, "derive");
  return Z;
}

void ArtifactStore::save_model(const TrainedModel& m) const {
  std::filesystem::create_directories(dir_);
  json j = header(kNetworkVersion, hash_);
  j["matrices"] = network_to_json(m.network);
  j["standardizer"] = json::array(
      {matrix_to_json("mean", m.standardizer.mean.transpose()),
       matrix_to_json("scale", m.standardizer.scale.transpose())});
  j["epoch_loss"] = m.epoch_loss;
  write_json(path(kNetworkFile), j);

  std::ostringstream os;
  os << hash_comment(hash_) << "fold,train_size,test_size,accuracy,macro_f1,loss\n";
  for (const auto& f : m.folds)
    os << f.fold << ',' << f.train_size << ',' << f.test_size << ','
       << format_double(f.accuracy) << ',' << format_double(f.macro_f1) << ','
       << format_double(f.loss) << '\n';
  write_file(path(kFoldsFile), os.str());
}

TrainedModel ArtifactStore::load_model() const {
  const json j = load(kNetworkFile, "train", kNetworkVersion);
  try {
    TrainedModel m;
    m.network = network_from_json(j.at("matrices"));
    m.standardizer.mean = find_matrix(j.at("standardizer"), "mean").transpose();
    m.standardizer.scale =
        find_matrix(j.at("standardizer"), "scale").transpose();
    m.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    throw InputError(path(kNetworkFile) + ": " + e.what());
  }
}

void ArtifactStore::save_eval(const EvalReport& r,
                              const SolveTrace& trace) const {
  std::filesystem::create_directories(dir_);
  json j = header("replete-metrics-v1", hash_);
  j["methods"] = {{"replete", metrics_to_json(r.replete)},
                  {"markov", metrics_to_json(r.markov)},
                  {"one_hot_ffnn", metrics_to_json(r.one_hot)}};
  j["test_windows"] = r.labels.size();
  json summary = {{"iterations_run", trace.iterations_run},
                  {"converged", trace.converged}};
  if (!trace.objective.empty()) {
    summary["initial_objective"] = trace.objective.front();
    summary["final_objective"] = trace.objective.back();
    summary["final_terms"] = terms_to_json(trace.terms.back());
  }
  j["solve_trace"] = summary;
  write_json(path(kMetricsJson), j);

  write_file(path(kMetricsCsv),
             hash_comment(hash_) + "method,accuracy,precision,recall,f1\n" +
                 metrics_row("replete", r.replete) +
                 metrics_row("markov", r.markov) +
                 metrics_row("one_hot_ffnn", r.one_hot));

  json bias = header("replete-bias-v1", hash_);
  bias["low"] = kFairLow;
  bias["high"] = kFairHigh;
  bias["entries"] = bias_to_json(r.bias);
  write_json(path(kBiasJson), bias);
  write_bias_csv(path(kBiasCsv), r.bias, hash_);
  write_bias_plot_csv(path(kBiasPlotCsv), r.bias, hash_);
}

void ArtifactStore::save_ablation(const std::vector<AblationRow>& rows) const {
  std::filesystem::create_directories(dir_);
  json j = header("replete-ablation-v1", hash_);
  json out = json::array();
  std::ostringstream os;
  os << hash_comment(hash_)
     << "table,inst,rep,feat,ind,temp,func,accuracy,precision,recall,f1\n";
  for (const auto& r : rows) {
    const bool derived = r.table == "derived";
    json row = {{"table", r.table}, {"metrics", metrics_to_json(r.metrics)}};
    std::string flags;
    if (derived) {
      row["toggles"] = {{"inst", r.a}, {"rep", r.b}, {"feat", r.c}};
      flags = std::to_string(r.a) + "," + std::to_string(r.b) + "," +
              std::to_string(r.c) + ",1,1,1";
    } else {
      row["toggles"] = {{"ind", r.a}, {"temp", r.b}, {"func", r.c}};
      flags = "1,1,1," + std::to_string(r.a) + "," + std::to_string(r.b) +
              "," + std::to_string(r.c);
    }
    out.push_back(std::move(row));
    os << r.table << ',' << flags << ',' << format_double(r.metrics.accuracy)
       << ',' << format_double(r.metrics.precision) << ','
       << format_double(r.metrics.recall) << ',' << format_double(r.metrics.f1)
       << '\n';
  }
  j["rows"] = std::move(out);
  write_json(path(kAblationJson), j);
  write_file(path(kAblationCsv), os.str());
}

void ArtifactStore::save_synth(const SynthDataset& data) const {
  std::filesystem::create_directories(dir_);
  write_events_csv(path("events.csv"), data.events);
  write_id_table_csv(path("features.csv"), data.individual_ids,
                     data.features.feature_names, data.features.values);
  std::vector<std::string> names;
  Matrix attrs(static_cast<Eigen::Index>(data.individual_ids.size()),
               static_cast<Eigen::Index>(data.attributes.size()));
  for (size_t c = 0; c < data.attributes.size(); ++c) {
    names.push_back(data.attributes[c].name);
    for (size_t r = 0; r < data.individual_ids.size(); ++r)
      attrs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          data.attributes[c].values[r];
  }
  write_id_table_csv(path("attributes.csv"), data.individual_ids, names, attrs);

  const GroundTruth& t = data.truth;
  json j = header("replete-truth-v1", hash_);
  j["seed"] = t.seed;
  j["noise"] = t.noise;
  j["services"] = data.service_names;
  j["dominant_cluster"] = t.dominant_cluster;
  j["matrices"] = json::array(
      {matrix_to_json("A", t.A), matrix_to_json("S", t.S),
       matrix_to_json("C", t.C), matrix_to_json("V", t.V),
       matrix_to_json("Rp", t.Rp), matrix_to_json("Rs", t.Rs),
       matrix_to_json("kernel", t.kernel)});
  write_json(path("truth.json"), j);
}

}  // namespace seqfactor
