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

// seqfactor: command-line front end for the staged pipeline.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqfactor/artifacts.h"
#include "seqfactor/pipeline.h"
#include "seqfactor/synth.h"

namespace {

using namespace seqfactor;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitOrder = 3;
constexpr int kExitDivergence = 4;

struct Flags {
  std::string config;
  int64_t seed = -1;
  std::string out;
  bool force = false;
  bool micro = false;
  std::string events;
  std::string features;
  std::string attributes;
  std::vector<std::string> settings;
};

PipelineConfig resolve_config(const Flags& flags) {
  PipelineConfig cfg;
  if (!flags.config.empty()) cfg = load_config(flags.config);
  for (const auto& s : flags.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (flags.seed >= 0) cfg.seed = static_cast<uint64_t>(flags.seed);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (!flags.events.empty()) cfg.events_path = flags.events;
  if (!flags.features.empty()) cfg.features_path = flags.features;
  if (!flags.attributes.empty()) cfg.attributes_path = flags.attributes;
  if (flags.micro) cfg.averaging = Averaging::kMicro;
  cfg.validate();
  return cfg;
}

void print_metrics(const char* name, const MetricsReport& r) {
  std::printf("%-13s accuracy %.4f  precision %.4f  recall %.4f  f1 %.4f\n",
              name, r.accuracy, r.precision, r.recall, r.f1);
}

void run_stage(const std::string& verb, const Flags& flags) {
  const PipelineConfig cfg = resolve_config(flags);
  const ArtifactStore store(cfg.out_dir, config_hash(cfg), flags.force);

  if (verb == "synth") {
    SynthConfig sc = cfg.synth;
    sc.seed = cfg.seed;
    sc.num_units = cfg.num_units;
    sc.unit_days = cfg.binning().unit_days;
    const SynthDataset data = generate(sc);
    store.save_synth(data);
    std::printf("wrote %zu events for %zu individuals to %s\n",
                data.events.size(), data.individual_ids.size(),
                cfg.out_dir.c_str());
  } else if (verb == "build") {
    const BuildOutput b = run_build(read_inputs(cfg), cfg);
    store.save_build(b);
    std::printf("%d services, %zu individuals, %zu windows\n",
                b.catalog.size(), b.individual_ids.size(),
                b.windows.windows.size());
  } else if (verb == "fit") {
    const BuildOutput b = store.load_build();
    const FitResult f = run_fit(b, cfg);
    store.save_fit(f);
    std::printf("%d iterations, converged %s, objective %.6g\n",
                f.trace.iterations_run, f.trace.converged ? "yes" : "no",
                f.trace.objective.back());
  } else if (verb == "derive") {
    const BuildOutput b = store.load_build();
    const FitResult f = store.load_fit();
    const DerivedFeatures d = run_derive(b, f.factors, cfg);
    store.save_derived(d);
    std::printf("%lld x %lld derived features\n",
                static_cast<long long>(d.Z.rows()),
                static_cast<long long>(d.Z.cols()));
  } else if (verb == "train") {
    const BuildOutput b = store.load_build();
    const Matrix Z = store.load_derived();
    if (static_cast<size_t>(Z.rows()) != b.windows.windows.size())
      throw InputError("derived features do not match the window count");
    const TrainedModel m = run_train(Z, b, cfg);
    store.save_model(m);
    for (const auto& f : m.folds)
      std::printf("fold %d  accuracy %.4f  f1 %.4f\n", f.fold, f.accuracy,
                  f.macro_f1);
  } else if (verb == "eval") {
    const BuildOutput b = store.load_build();
    const FitResult f = store.load_fit();
    const Matrix Z = store.load_derived();
    const TrainedModel m = store.load_model();
    if (static_cast<size_t>(Z.rows()) != b.windows.windows.size())
      throw InputError("derived features do not match the window count");
    const EvalReport r = run_eval(b, m, Z, cfg);
    store.save_eval(r, f.trace);
    print_metrics("replete", r.replete);
    print_metrics("markov", r.markov);
    print_metrics("one_hot_ffnn", r.one_hot);
  } else if (verb == "ablate") {
    const BuildOutput b = store.load_build();
    const auto rows = run_ablation(b, cfg);
    store.save_ablation(rows);
    for (const auto& r : rows)
      std::printf("%-9s %d%d%d  accuracy %.4f  f1 %.4f\n", r.table.c_str(),
                  r.a, r.b, r.c, r.metrics.accuracy, r.metrics.f1);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service sequence factorization and next-service prediction"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "key = value config file");
  app.add_option("--seed", flags.seed, "seed for every random draw");
  app.add_option("--out", flags.out, "artifact directory");
  app.add_flag("--force", flags.force, "accept artifacts with another hash");
  app.add_option("--set", flags.settings, "override a config key (KEY=VALUE)");
  app.add_option("--events", flags.events, "events CSV");
  app.add_option("--features", flags.features, "features CSV");
  app.add_option("--attributes", flags.attributes, "binary attributes CSV");
  app.add_flag("--micro", flags.micro, "micro-averaged metrics");

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"build", "bin events and write context matrices and windows"},
      {"fit", "factorize the context matrices"},
      {"derive", "derive per-window features from the factors"},
      {"train", "train the classifier with cross validation"},
      {"eval", "score the classifier, baselines and bias audit"},
      {"ablate", "run the component ablation tables"},
      {"synth", "generate a synthetic population"}};
  for (const auto& [name, help] : verbs) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    run_stage(verb, flags);
  } catch (const PipelineOrderError& e) {
    std::cerr << "seqfactor " << verb << ": " << e.what() << "\n";
    return kExitOrder;
  } catch (const NonFiniteObjective& e) {
    std::cerr << "seqfactor " << verb << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "seqfactor " << verb << ": " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
