// Copyright 2026 The pvqflow Authors
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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvqflow/pvqflow.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInternal = 1;

int exit_code(pvq_status status) {
  switch (status) {
    case PVQ_OK: return kExitOk;
    case PVQ_ERR_NUMERICAL: return kExitNumerical;
    case PVQ_ERR_INTERNAL: return kExitInternal;
    default: return kExitUsage;
  }
}

int report(pvq_status status) {
  if (status != PVQ_OK) {
    std::cerr << "pvqflow: " << pvq_status_name(status) << ": " << pvq_last_error() << "\n";
  }
  return exit_code(status);
}

struct ConfigDeleter {
  void operator()(pvq_config* c) const { pvq_config_free(c); }
};
using ConfigPtr = std::unique_ptr<pvq_config, ConfigDeleter>;

std::string get(const pvq_config* cfg, const char* key) {
  std::size_t needed = 0;
  if (pvq_config_get(cfg, key, nullptr, 0, &needed) != PVQ_OK) return {};
  std::string value(needed, '\0');
  pvq_config_get(cfg, key, value.data(), value.size(), &needed);
  value.resize(needed - 1);
  return value;
}

std::string out_path(const pvq_config* cfg, const std::string& name) {
  std::string dir = get(cfg, "paths.out_dir");
  if (dir.empty()) return name;
  if (dir.back() != '/') dir += '/';
  return dir + name;
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Options {
  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string iterations;
  bool grad_check = false;
  bool resume = false;
  std::string factors;
  std::string input;
  std::string original;
  std::vector<std::string> manipulated;
  std::string segments;
  std::string features;
};

// Precedence: built-in defaults < config file < --seed/--out < --set < command flags.
pvq_status build_config(const Options& o, const std::vector<std::pair<std::string, std::string>>& flags,
                        ConfigPtr& out) {
  pvq_config* raw = nullptr;
  pvq_status st = o.config_path.empty() ? pvq_config_new(&raw) : pvq_config_load(o.config_path.c_str(), &raw);
  if (st != PVQ_OK) return st;
  out.reset(raw);
  std::vector<std::pair<std::string, std::string>> pending;
  if (!o.seed.empty()) pending.emplace_back("run.seed", o.seed);
  if (!o.out_dir.empty()) pending.emplace_back("paths.out_dir", o.out_dir);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "pvqflow: --set expects key=value, got '" << kv << "'\n";
      return PVQ_ERR_CONFIG;
    }
    pending.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  pending.insert(pending.end(), flags.begin(), flags.end());
  for (const auto& [key, value] : pending) {
    st = pvq_config_set(out.get(), key.c_str(), value.c_str());
    if (st != PVQ_OK) return st;
  }
  return pvq_config_validate(out.get());
}

void print_grad_check(const pvq_grad_check_summary& g) {
  std::cout << "grad-check: " << (g.passed ? "passed" : "FAILED") << " points=" << g.points
            << " parameters=" << g.parameters_checked
            << " max_relative_error=" << fmt(g.max_relative_error) << " tolerance=" << fmt(g.tolerance)
            << "\n";
}

int cmd_gen(const pvq_config* cfg) {
  pvq_gen_summary s{};
  if (const auto st = pvq_run_gen(cfg, &s); st != PVQ_OK) return report(st);
  std::cout << "N=" << s.n << " N_heldout=" << s.n_heldout << " D=" << s.dim << " seed=" << s.seed
            << "\n";
  return kExitOk;
}

int cmd_train(const pvq_config* cfg, bool resume) {
  pvq_train_summary s{};
  const auto st = pvq_run_train(cfg, resume ? 1 : 0, &s);
  if (s.grad_checked) print_grad_check(s.grad_check);
  if (st != PVQ_OK) return report(st);
  std::cout << "iterations " << s.first_iteration << ".." << s.first_iteration + s.iterations;
  if (s.iterations > 0) {
    std::cout << " nll " << fmt(s.initial_loss) << " -> " << fmt(s.final_loss);
  }
  std::string checkpoint = get(cfg, "paths.checkpoint");
  if (checkpoint.empty()) checkpoint = out_path(cfg, "model.cnfp");
  std::cout << "\ncheckpoint " << checkpoint << "\n";
  return kExitOk;
}

int cmd_manipulate(const pvq_config* cfg) {
  pvq_manipulate_summary s{};
  if (const auto st = pvq_run_manipulate(cfg, &s); st != PVQ_OK) return report(st);
  std::cout << "manipulated " << s.embeddings << " embeddings at " << s.factors << " factors\n";
  return kExitOk;
}

int cmd_analyze(const pvq_config* cfg) {
  pvq_analyze_summary s{};
  if (const auto st = pvq_run_analyze(cfg, &s); st != PVQ_OK) return report(st);
  print_file(out_path(cfg, "summary_grid.txt"));
  std::cout << "records " << s.records << "\n";
  if (s.has_correlation) {
    std::cout << "R(factor, recovered attribute) = " << fmt(s.r) << " slope " << fmt(s.slope)
              << " n=" << s.n << "\n";
  }
  return kExitOk;
}

int cmd_grad_check(const pvq_config* cfg) {
  pvq_grad_check_summary g{};
  if (const auto st = pvq_run_grad_check(cfg, &g); st != PVQ_OK) return report(st);
  print_grad_check(g);
  return g.passed ? kExitOk : kExitNumerical;
}

int cmd_estimate(const pvq_config* cfg, const std::string& features) {
  double a = 0.0;
  std::size_t active = 0;
  if (const auto st = pvq_estimate_attribute(cfg, features.c_str(), &a, &active); st != PVQ_OK) {
    return report(st);
  }
  std::cout << "a=" << fmt(a) << " active_frames=" << active << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-conditioned continuous normalizing flows for speaker embeddings"};
  app.set_version_flag("--version", std::string(pvq_version()));
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "top-level seed (run.seed)");
  app.add_option("--out", o.out_dir, "output directory (paths.out_dir)");
  app.add_option("--set", o.overrides, "override a configuration key, key=value")
      ->allow_extra_args(false);

  auto* gen = app.add_subcommand("gen", "generate the synthetic training and held-out sets");
  auto* train = app.add_subcommand("train", "train the flow by maximum likelihood");
  train->add_option("--iterations", o.iterations, "training.iterations");
  train->add_flag("--grad-check", o.grad_check, "run the gradient self-test before training");
  train->add_flag("--resume", o.resume, "continue from the checkpoint and optimizer state");
  auto* manip = app.add_subcommand("manipulate", "shift the attribute of embeddings");
  auto* factors_opt = manip->add_option("--factors", o.factors, "sweep a:step:b or comma list (manipulate.factors)");
  manip->add_option("--input", o.input, "heldout or train (manipulate.input)");
  auto* analyze = app.add_subcommand("analyze", "temporal analysis and correlations");
  analyze->add_option("--original", o.original, "original frame sequence (CNFZ)");
  analyze->add_option("--manipulated", o.manipulated, "factor=path, repeatable");
  analyze->add_option("--segments", o.segments, "segment DSV for the explicit sequences");
  auto* gc = app.add_subcommand("grad-check", "compare gradients against finite differences");
  auto* estimate = app.add_subcommand("estimate", "global attribute of a frame-feature file");
  estimate->add_option("features", o.features, "frame_index,energy,creak_probability DSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  std::vector<std::pair<std::string, std::string>> flags;
  if (!o.iterations.empty()) flags.emplace_back("training.iterations", o.iterations);
  if (o.grad_check) flags.emplace_back("training.grad_check", "true");
  if (factors_opt->count() > 0) flags.emplace_back("manipulate.factors", o.factors);
  if (!o.input.empty()) flags.emplace_back("manipulate.input", o.input);
  if (!o.original.empty()) flags.emplace_back("analyze.original_sequence", o.original);
  if (!o.manipulated.empty()) {
    std::string joined;
    for (const auto& m : o.manipulated) joined += (joined.empty() ? "" : ",") + m;
    flags.emplace_back("analyze.manipulated_sequences", joined);
  }
  if (!o.segments.empty()) flags.emplace_back("analyze.segments", o.segments);

  ConfigPtr cfg;
  if (const auto st = build_config(o, flags, cfg); st != PVQ_OK) return report(st);

  if (gen->parsed()) return cmd_gen(cfg.get());
  if (train->parsed()) return cmd_train(cfg.get(), o.resume);
  if (manip->parsed()) return cmd_manipulate(cfg.get());
  if (analyze->parsed()) return cmd_analyze(cfg.get());
  if (gc->parsed()) return cmd_grad_check(cfg.get());
  if (estimate->parsed()) return cmd_estimate(cfg.get(), o.features);
  return kExitUsage;
}
