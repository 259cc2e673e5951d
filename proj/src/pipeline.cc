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

#include "seqfactor/pipeline.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "seqfactor/io.h"

namespace seqfactor {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  return out;
}

int64_t to_int(const std::string& key, const std::string& v) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

template <typename E>
E to_enum(const std::string& key, const std::string& v,
          const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [n, e] : names)
    if (n == v) return e;
  std::string allowed;
  for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : "|") + n;
  throw ConfigError("config key '" + key + "': expected " + allowed +
                    ", got '" + v + "'");
}

template <typename E>
std::string enum_name(E e, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [n, x] : names)
    if (x == e) return n;
  return "?";
}

const std::vector<std::pair<std::string, GammaMode>> kGammaNames = {
    {"laplacian", GammaMode::kLaplacian}, {"raw", GammaMode::kRaw}};
const std::vector<std::pair<std::string, TimeMapping>> kMappingNames = {
    {"cyclic", TimeMapping::kCyclic}, {"clamp", TimeMapping::kClamp}};
const std::vector<std::pair<std::string, SimilarityBasis>> kBasisNames = {
    {"features_and_history", SimilarityBasis::kFeaturesAndHistory},
    {"features", SimilarityBasis::kFeaturesOnly}};
const std::vector<std::pair<std::string, SplitMode>> kSplitNames = {
    {"window", SplitMode::kWindow}, {"individual", SplitMode::kIndividual}};
const std::vector<std::pair<std::string, PairMode>> kPairNames = {
    {"all", PairMode::kAll},
    {"consecutive", PairMode::kConsecutive},
    {"ordered", PairMode::kOrdered}};
const std::vector<std::pair<std::string, Averaging>> kAveragingNames = {
    {"macro", Averaging::kMacro}, {"micro", Averaging::kMicro}};

using Setter = std::function<void(PipelineConfig&, const std::string&,
                                  const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Key {
  Setter set;
  Getter get;  // empty for keys left out of the hash
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(int64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

#define SF_DOUBLE(field)                                                   \
  Key {                                                                    \
    [](PipelineConfig& c, const std::string& k, const std::string& v) {    \
      c.field = to_double(k, v);                                           \
    },                                                                     \
        [](const PipelineConfig& c) { return fmt(double(c.field)); }       \
  }
#define SF_INT(field)                                                      \
  Key {                                                                    \
    [](PipelineConfig& c, const std::string& k, const std::string& v) {    \
      c.field = static_cast<decltype(c.field)>(to_int(k, v));              \
    },                                                                     \
        [](const PipelineConfig& c) { return fmt(int64_t(c.field)); }      \
  }
#define SF_BOOL(field)                                                     \
  Key {                                                                    \
    [](PipelineConfig& c, const std::string& k, const std::string& v) {    \
      c.field = to_bool(k, v);                                             \
    },                                                                     \
        [](const PipelineConfig& c) { return fmt(bool(c.field)); }         \
  }
#define SF_ENUM(field, names)                                              \
  Key {                                                                    \
    [](PipelineConfig& c, const std::string& k, const std::string& v) {    \
      c.field = to_enum(k, v, names);                                      \
    },                                                                     \
        [](const PipelineConfig& c) { return enum_name(c.field, names); }  \
  }
#define SF_PATH(field)                                                     \
  Key {                                                                    \
    [](PipelineConfig& c, const std::string&, const std::string& v) {      \
      c.field = v;                                                         \
    },                                                                     \
        Getter {}                                                          \
  }

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      {"events", SF_PATH(events_path)},
      {"features", SF_PATH(features_path)},
      {"attributes", SF_PATH(attributes_path)},
      {"out", SF_PATH(out_dir)},
      {"alpha", SF_DOUBLE(solver.alpha)},
      {"beta", SF_DOUBLE(solver.beta)},
      {"lambda", SF_DOUBLE(solver.lambda)},
      {"mu", SF_DOUBLE(solver.mu)},
      {"k", SF_INT(solver.k)},
      {"m", SF_INT(solver.m)},
      {"max_iters", SF_INT(solver.max_iters)},
      {"tol", SF_DOUBLE(solver.tol)},
      {"eps", SF_DOUBLE(solver.eps)},
      {"gamma_mode", SF_ENUM(solver.gamma_mode, kGammaNames)},
      {"use_temporal", SF_BOOL(solver.use_temporal)},
      {"use_functional", SF_BOOL(solver.use_functional)},
      {"use_individual", SF_BOOL(solver.use_individual)},
      {"tau_unit",
       Key{[](PipelineConfig& c, const std::string& k, const std::string& v) {
             if (v != "day" && v != "week" && v != "month")
               throw ConfigError("config key '" + k +
                                 "': expected day|week|month, got '" + v +
                                 "'");
             c.tau_unit = v;
           },
           [](const PipelineConfig& c) { return c.tau_unit; }}},
      {"num_units", SF_INT(num_units)},
      {"origin_day", SF_INT(origin_day)},
      {"time_mapping", SF_ENUM(time_mapping, kMappingNames)},
      {"similarity", SF_ENUM(similarity, kBasisNames)},
      {"N", SF_INT(window)},
      {"train_fraction", SF_DOUBLE(train_fraction)},
      {"split_mode", SF_ENUM(split_mode, kSplitNames)},
      {"pair_mode", SF_ENUM(pair_mode, kPairNames)},
      {"learning_rate", SF_DOUBLE(predictor.learning_rate)},
      {"epochs", SF_INT(predictor.epochs)},
      {"batch_size", SF_INT(predictor.batch_size)},
      {"hidden", SF_INT(predictor.hidden)},
      {"folds", SF_INT(predictor.folds)},
      {"standardize", SF_BOOL(standardize)},
      {"averaging", SF_ENUM(averaging, kAveragingNames)},
      {"use_inst", SF_BOOL(use_inst)},
      {"use_rep", SF_BOOL(use_rep)},
      {"use_feat", SF_BOOL(use_feat)},
      {"seed", SF_INT(seed)},
      {"synth_individuals", SF_INT(synth.num_individuals)},
      {"synth_services", SF_INT(synth.num_services)},
      {"synth_k", SF_INT(synth.k)},
      {"synth_features", SF_INT(synth.num_features)},
      {"synth_noise", SF_DOUBLE(synth.noise)},
      {"synth_min_events", SF_INT(synth.min_events)},
      {"synth_max_events", SF_INT(synth.max_events)},
      {"synth_affinity", SF_DOUBLE(synth.affinity)},
  };
  return table;
}

#undef SF_DOUBLE
#undef SF_INT
#undef SF_BOOL
#undef SF_ENUM
#undef SF_PATH

Matrix gather_rows(const Matrix& Z, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), Z.cols());
  for (size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = Z.row(idx[i]);
  return out;
}

void zero_block(Matrix& Z, const FeatureBlock& b) {
  Z.middleCols(b.offset, b.width).setZero();
}

// Runs fn(i) for i in [0, n) on up to thread_limit() threads.
void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(n, thread_limit());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

TimeBinning PipelineConfig::binning() const {
  TimeBinning b;
  b.unit_days = tau_unit == "day" ? 1 : tau_unit == "month" ? 30 : 7;
  b.num_units = num_units;
  b.origin_day = origin_day;
  b.mapping = time_mapping;
  return b;
}

void PipelineConfig::validate() const {
  solver.validate();
  predictor.validate();
  if (num_units < 2) throw ConfigError("num_units must be >= 2");
  if (window < 1) throw ConfigError("N must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
}

void apply_setting(PipelineConfig& cfg, const std::string& key,
                   const std::string& value) {
  const auto& table = keys();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(cfg, key, value);
}

void apply_config_text(PipelineConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg;
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  apply_config_text(cfg, text);
  return cfg;
}

std::string canonical_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [name, key] : keys()) {
    if (!key.get) continue;
    out += name + "=" + key.get(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const PipelineConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

StageSeeds stage_seeds(uint64_t seed) {
  return {seed, seed + 1, seed + 2, seed + 3, seed + 4};
}

PipelineInputs inputs_from_synth(const SynthDataset& data) {
  return {data.events, data.individual_ids, data.features, data.attributes};
}

PipelineInputs read_inputs(const PipelineConfig& cfg) {
  if (cfg.events_path.empty()) throw InputError("no events file configured");
  if (cfg.features_path.empty())
    throw InputError("no features file configured");
  PipelineInputs in;
  in.events = read_events_csv(cfg.events_path);
  IdTable table = read_id_table_csv(cfg.features_path);
  in.features = features_from_table(table, cfg.features_path);
  in.individual_ids = table.ids;
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < table.ids.size(); ++i) {
    if (!index.emplace(table.ids[i], static_cast<int>(i)).second)
      throw InputError(cfg.features_path + ": duplicate individual_id '" +
                       table.ids[i] + "'");
  }
  if (!cfg.attributes_path.empty()) {
    IdTable attrs = read_id_table_csv(cfg.attributes_path);
    for (size_t c = 0; c < attrs.columns.size(); ++c) {
      NamedAttribute a{attrs.columns[c],
                       std::vector<int>(table.ids.size(), -1)};
      for (size_t r = 0; r < attrs.ids.size(); ++r) {
        auto it = index.find(attrs.ids[r]);
        if (it == index.end())
          throw InputError(cfg.attributes_path + ": unknown individual_id '" +
                           attrs.ids[r] + "'");
        const double v = attrs.values(static_cast<Eigen::Index>(r),
                                      static_cast<Eigen::Index>(c));
        if (v != 0.0 && v != 1.0)
          throw InputError(cfg.attributes_path + ": attribute '" +
                           a.name + "' must be 0 or 1");
        a.values[static_cast<size_t>(it->second)] = static_cast<int>(v);
      }
      for (int v : a.values)
        if (v < 0)
          throw InputError(cfg.attributes_path + ": attribute '" + a.name +
                           "' missing for some individuals");
      in.attributes.push_back(std::move(a));
    }
  }
  return in;
}

BuildOutput run_build(const PipelineInputs& in, const PipelineConfig& cfg) {
  cfg.validate();
  if (static_cast<size_t>(in.features.values.rows()) !=
      in.individual_ids.size())
    throw ShapeError("feature rows do not match individual count");
  BuildOutput b;
  b.catalog = build_catalog(in.events);
  b.individual_ids = in.individual_ids;
  b.features = in.features;
  b.attributes = in.attributes;
  const auto records = resolve_events(in.events, b.catalog, b.individual_ids);
  b.ctx = build_contexts(records, b.features.values, b.catalog.size(),
                         cfg.binning(), cfg.similarity);
  const Sequences seqs =
      to_sequences(records, static_cast<int>(b.individual_ids.size()));
  b.windows = window_sequences(seqs, cfg.window);
  if (b.windows.windows.empty())
    throw InputError("no sequence is longer than N; nothing to predict");
  b.is_train = split_windows(b.windows, cfg.train_fraction,
                             stage_seeds(cfg.seed).split, cfg.split_mode);
  return b;
}

FitResult run_fit(const BuildOutput& b, const PipelineConfig& cfg) {
  return fit(b.ctx, b.features.values, cfg.solver, stage_seeds(cfg.seed).fit);
}

DerivedFeatures run_derive(const BuildOutput& b, const FactorSet& f,
                           const PipelineConfig& cfg) {
  FeatureDeriver deriver(f, b.features.values, cfg.window, cfg.pair_mode);
  DerivedFeatures out{deriver.layout(),
                      deriver.assemble_all(b.windows.windows)};
  const FeatureLayout& L = out.layout;
  if (!cfg.use_inst) zero_block(out.Z, L.block(kClusterBlock));
  if (!cfg.use_rep) {
    zero_block(out.Z, L.block(kFeatureReprBlock));
    zero_block(out.Z, L.block(kServiceReprBlock));
  }
  if (!cfg.use_feat) {
    zero_block(out.Z, L.block(kTemporalBlock));
    zero_block(out.Z, L.block(kFunctionalBlock));
  }
  return out;
}

Standardizer Standardizer::identity(int width) {
  return {Vector::Zero(width), Vector::Ones(width)};
}

Standardizer Standardizer::fit(const Matrix& Z) {
  const Eigen::Index n = Z.rows();
  Standardizer s;
  s.mean = Z.colwise().mean().transpose();
  s.scale = Vector::Zero(Z.cols());
  if (n == 0) return s;
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    const double var =
        (Z.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean(c)))) s.scale(c) = 1.0 / sd;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& Z) const {
  if (Z.cols() != mean.size())
    throw InputError("standardizer width does not match features");
  return ((Z.rowwise() - mean.transpose()).array().rowwise() *
          scale.transpose().array())
      .matrix();
}

SplitData split_rows(const Matrix& Z, const BuildOutput& b) {
  std::vector<int> train_idx, test_idx;
  SplitData s;
  for (size_t i = 0; i < b.windows.windows.size(); ++i) {
    const int label = b.windows.windows[i].label;
    if (b.is_train[i]) {
      train_idx.push_back(static_cast<int>(i));
      s.train_labels.push_back(label);
    } else {
      test_idx.push_back(static_cast<int>(i));
      s.test_labels.push_back(label);
    }
  }
  s.train_rows = gather_rows(Z, train_idx);
  s.test_rows = gather_rows(Z, test_idx);
  s.test_index = test_idx;
  return s;
}

namespace {

TrainedModel train_on(const Matrix& Z, const BuildOutput& b,
                      const PipelineConfig& cfg, uint64_t seed,
                      bool cross_validate) {
  const SplitData s = split_rows(Z, b);
  TrainedModel m;
  m.standardizer = cfg.standardize
                       ? Standardizer::fit(s.train_rows)
                       : Standardizer::identity(static_cast<int>(Z.cols()));
  const Matrix rows = m.standardizer.apply(s.train_rows);
  TrainConfig tc = cfg.predictor;
  tc.seed = seed;
  if (cross_validate) {
    TrainResult r = train(rows, s.train_labels, b.catalog.size(), tc);
    m.network = std::move(r.network);
    m.folds = std::move(r.folds);
    m.epoch_loss = std::move(r.epoch_loss);
  } else {
    tc.validate();
    m.network =
        fit_network(rows, s.train_labels, b.catalog.size(), tc, &m.epoch_loss);
  }
  return m;
}

}  // namespace

TrainedModel run_train(const Matrix& Z, const BuildOutput& b,
                       const PipelineConfig& cfg, bool cross_validate) {
  return train_on(Z, b, cfg, stage_seeds(cfg.seed).train, cross_validate);
}

std::vector<int> predict_test(const TrainedModel& model, const Matrix& Z,
                              const BuildOutput& b) {
  const SplitData s = split_rows(Z, b);
  return predict_batch(model.network, model.standardizer.apply(s.test_rows));
}

EvalReport run_eval(const BuildOutput& b, const TrainedModel& model,
                    const Matrix& Z, const PipelineConfig& cfg) {
  const int classes = b.catalog.size();
  const SplitData s = split_rows(Z, b);
  EvalReport r;
  r.labels = s.test_labels;
  r.predictions =
      predict_batch(model.network, model.standardizer.apply(s.test_rows));
  r.replete = classification_metrics(r.predictions, r.labels, classes,
                                     cfg.averaging);

  std::vector<Window> test_windows;
  for (int i : s.test_index) test_windows.push_back(b.windows.windows[i]);
  const auto markov =
      markov_baseline(b.ctx.T, test_windows, stage_seeds(cfg.seed).markov);
  r.markov = classification_metrics(markov, r.labels, classes, cfg.averaging);

  const Matrix onehot = one_hot_history(b.windows.windows, classes);
  const TrainedModel base =
      train_on(onehot, b, cfg, stage_seeds(cfg.seed).baseline, false);
  const auto base_pred = predict_test(base, onehot, b);
  r.one_hot =
      classification_metrics(base_pred, r.labels, classes, cfg.averaging);

  std::vector<NamedAttribute> per_window;
  for (const auto& a : b.attributes) {
    NamedAttribute w{a.name, {}};
    for (int i : s.test_index)
      w.values.push_back(
          a.values[static_cast<size_t>(b.windows.windows[i].individual)]);
    per_window.push_back(std::move(w));
  }
  r.bias = bias_audit(r.predictions, r.labels, per_window, classes);
  return r;
}

std::vector<AblationRow> run_ablation(const BuildOutput& b,
                                      const PipelineConfig& cfg) {
  // Row order: each component alone, the three pairs, then all.
  const bool masks[7][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1},
                            {1, 0, 1}, {1, 1, 0}, {1, 1, 1}};
  std::vector<AblationRow> rows(14);
  for (int i = 0; i < 7; ++i) {
    rows[i] = {"derived", masks[i][0], masks[i][1], masks[i][2], {}};
    rows[7 + i] = {"objective", masks[i][0], masks[i][1], masks[i][2], {}};
  }
  const int classes = b.catalog.size();

  auto score = [&](const PipelineConfig& c, const FactorSet& f) {
    const DerivedFeatures d = run_derive(b, f, c);
    const TrainedModel m = run_train(d.Z, b, c, false);
    const SplitData s = split_rows(d.Z, b);
    return classification_metrics(predict_test(m, d.Z, b), s.test_labels,
                                  classes, c.averaging);
  };

  // Objective rows refit the factors; the derived rows share the full fit.
  std::vector<FitResult> fits(8);
  parallel_for(8, [&](int i) {
    PipelineConfig c = cfg;
    if (i < 7) {
      c.solver.use_individual = masks[i][0];
      c.solver.use_temporal = masks[i][1];
      c.solver.use_functional = masks[i][2];
    }
    fits[static_cast<size_t>(i)] = run_fit(b, c);
  });

  parallel_for(14, [&](int i) {
    PipelineConfig c = cfg;
    c.use_inst = c.use_rep = c.use_feat = true;
    const FactorSet* f = nullptr;
    if (i < 7) {
      c.use_inst = masks[i][0];
      c.use_rep = masks[i][1];
      c.use_feat = masks[i][2];
      f = &fits[7].factors;
    } else {
      f = &fits[static_cast<size_t>(i - 7)].factors;
    }
    rows[static_cast<size_t>(i)].metrics = score(c, *f);
  });
  return rows;
}

PipelineResult run_pipeline(const PipelineInputs& in,
                            const PipelineConfig& cfg) {
  BuildOutput b = run_build(in, cfg);
  FitResult f = run_fit(b, cfg);
  DerivedFeatures d = run_derive(b, f.factors, cfg);
  TrainedModel m = run_train(d.Z, b, cfg);
  EvalReport e = run_eval(b, m, d.Z, cfg);
  return {std::move(b), std::move(f), std::move(d), std::move(m),
          std::move(e)};
}

int thread_limit() {
  const char* env = std::getenv("SEQFACTOR_THREADS");
  if (!env || !*env) return 1;
  int n = 0;
  auto [p, ec] = std::from_chars(env, env + std::strlen(env), n);
  if (ec != std::errc() || n < 1) return 1;
  return n;
}

}  // namespace seqfactor
