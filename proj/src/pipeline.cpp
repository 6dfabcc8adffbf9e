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

#include "pvqflow/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "pvqflow/ccnf.hpp"
#include "pvqflow/error.hpp"
#include "pvqflow/formats.hpp"
#include "pvqflow/io.hpp"
#include "pvqflow/rng.hpp"
#include "pvqflow/synthdata.hpp"

namespace pvq::pipeline {
namespace {

namespace fs = std::filesystem;

struct Paths {
  std::string train_embeddings, train_attributes, heldout_embeddings, heldout_attributes;
  std::string checkpoint, optimizer_state, loss_curve, manifest;
};

Paths resolve(const config::RunConfig& cfg) {
  const auto& p = cfg.paths;
  return {p.resolve(p.train_embeddings, "train.cnfe"),
          p.resolve(p.train_attributes, "train_attributes.csv"),
          p.resolve(p.heldout_embeddings, "heldout.cnfe"),
          p.resolve(p.heldout_attributes, "heldout_attributes.csv"),
          p.resolve(p.checkpoint, "model.cnfp"),
          p.resolve(p.optimizer_state, "model.cnfo"),
          p.resolve(p.loss_curve, "loss.csv"),
          p.resolve(p.manifest, "manipulations.csv")};
}

synth::SyntheticWorldConfig world(const config::RunConfig& cfg) {
  return synth::SyntheticWorldConfig::make(cfg.world.dim, cfg.world.noise_scale, world_seed(cfg));
}

train::TrainingConfig training_config(const config::RunConfig& cfg) {
  train::TrainingConfig t = cfg.training;
  t.seed = derive_seed(cfg.seed, "batches");
  t.trace.seed = derive_seed(cfg.seed, "probes");
  return t;
}

// Missing inputs are configuration problems for the caller.
train::Dataset load_input(const std::string& emb, const std::string& attrs) {
  if (!fs::exists(emb)) throw ConfigError("missing embeddings file " + emb);
  if (!fs::exists(attrs)) throw ConfigError("missing attribute file " + attrs);
  return formats::read_dataset(emb, attrs);
}

std::string out_file(const config::RunConfig& cfg, const std::string& name) {
  return cfg.paths.resolve("", name);
}

struct ManifestEntry {
  double factor = 0.0;
  std::string embeddings;
  std::string attributes;
};

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("missing manifest " + path + " (run manipulate first)");
  const auto rows = io::read_dsv(path, {"index", "factor", "embeddings", "attributes"});
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> out;
  for (const auto& row : rows) {
    out.push_back({io::parse_double(row[1]), (base / row[2]).string(), (base / row[3]).string()});
  }
  return out;
}

std::vector<std::pair<double, std::string>> parse_sequence_list(const std::string& text) {
  std::vector<std::pair<double, std::string>> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("manipulated_sequences entries must be factor=path");
    double f = 0.0;
    try {
      f = io::parse_double(item.substr(0, eq));
    } catch (const IoError&) {
      throw ConfigError("bad factor in manipulated_sequences: '" + item + "'");
    }
    out.emplace_back(f, item.substr(eq + 1));
  }
  if (out.empty()) throw ConfigError("analyze.manipulated_sequences is empty");
  return out;
}

void write_reports(const config::RunConfig& cfg, const AnalyzeReport& report,
                   const std::vector<analysis::DeltaRecord>& records) {
  io::write_file_atomic(out_file(cfg, "summary.csv"), analysis::summary_dsv(report.tables));
  io::write_file_atomic(out_file(cfg, "summary.txt"), analysis::summary_text(report.tables));
  io::write_file_atomic(out_file(cfg, "summary_grid.txt"), analysis::summary_grid(report.tables));
  io::write_file_atomic(out_file(cfg, "deltas.csv"), analysis::deltas_dsv(records, cfg.analyze.set_label));
  io::write_file_atomic(out_file(cfg, "correlations.csv"), analysis::correlation_dsv(report.correlations));
}

AnalyzeReport analyze_explicit(const config::RunConfig& cfg) {
  const auto& a = cfg.analyze;
  if (a.segments.empty()) throw ConfigError("analyze.segments is required with analyze.original_sequence");
  const auto original = formats::read_sequence(a.original_sequence);
  const auto segments = formats::read_segments(a.segments);
  synth::validate_segments(segments, original.frames);
  std::vector<analysis::DeltaRecord> records;
  for (const auto& [factor, path] : parse_sequence_list(a.manipulated_sequences)) {
    const auto manipulated = formats::read_sequence(path);
    const auto deltas = analysis::mae_delta(original, manipulated);
    const auto r = analysis::categorize(deltas, segments, factor);
    records.insert(records.end(), r.begin(), r.end());
  }
  AnalyzeReport report;
  report.records = records.size();
  report.tables.push_back(analysis::summarize(records, a.grid, a.combine_signs, a.set_label));
  write_reports(cfg, report, records);
  return report;
}

}  // namespace

std::uint64_t world_seed(const config::RunConfig& cfg) { return derive_seed(cfg.seed, "world"); }

std::uint64_t surrogate_seed(const config::RunConfig& cfg, std::size_t utterance) {
  return hash_counter({derive_seed(cfg.seed, "surrogate"), utterance});
}

std::uint64_t segment_seed(const config::RunConfig& cfg, std::size_t utterance) {
  return hash_counter({derive_seed(cfg.seed, "segments"), utterance});
}

GenReport run_gen(const config::RunConfig& cfg) {
  cfg.validate();
  if (cfg.world.n == 0) throw ConfigError("world.n must be at least 1");
  if (cfg.world.n_heldout == 0) throw ConfigError("world.n_heldout must be at least 1");
  const Paths paths = resolve(cfg);
  const auto w = world(cfg);
  formats::write_dataset(paths.train_embeddings, paths.train_attributes,
                         synth::gen_speaker_dataset(w, cfg.world.n, 0));
  formats::write_dataset(paths.heldout_embeddings, paths.heldout_attributes,
                         synth::gen_speaker_dataset(w, cfg.world.n_heldout, 1));
  return {cfg.world.n, cfg.world.n_heldout, cfg.world.dim, cfg.seed};
}

TrainReport run_train(const config::RunConfig& cfg, bool resume) {
  cfg.validate();
  const Paths paths = resolve(cfg);
  const train::Dataset data = load_input(paths.train_embeddings, paths.train_attributes);
  data.validate();
  const train::TrainingConfig tcfg = training_config(cfg);
  tcfg.validate(data.size());

  TrainReport report;
  if (cfg.grad_check) {
    report.grad_check = train::gradient_self_test(derive_seed(cfg.seed, "grad-check"));
    if (!report.grad_check->passed) {
      throw NumericalError("gradient self-test failed: max relative error " +
                           std::to_string(report.grad_check->max_relative_error));
    }
  }

  nn::Mlp net;
  train::AdamState optimizer;
  std::vector<double> previous_curve;
  if (resume) {
    if (!fs::exists(paths.checkpoint)) throw ConfigError("cannot resume: missing " + paths.checkpoint);
    net = formats::read_checkpoint(paths.checkpoint);
    if (fs::exists(paths.optimizer_state)) optimizer = formats::read_optimizer_state(paths.optimizer_state);
    if (fs::exists(paths.loss_curve)) previous_curve = formats::read_loss_curve(paths.loss_curve);
    if (previous_curve.size() != optimizer.step) {
      throw ConfigError("loss curve length does not match the optimizer state");
    }
  } else {
    net = nn::Mlp(cfg.world.dim, cfg.model.hidden, cfg.model.hidden_layers);
    net.initialize(derive_seed(cfg.seed, "init"), cfg.model.output_scale);
  }
  if (net.dim() != data.dim) throw ConfigError("checkpoint dimension does not match the dataset");

  report.first_iteration = optimizer.step;
  auto save = [&](const nn::Mlp& params, const train::AdamState& state,
                  const std::vector<double>& curve) {
    formats::write_checkpoint(paths.checkpoint, params);
    formats::write_optimizer_state(paths.optimizer_state, state);
    formats::write_loss_curve(paths.loss_curve, curve);
  };
  const train::TrainResult result = train::train(
      data, tcfg, net, optimizer,
      [&](std::uint64_t, const nn::Mlp& params, const train::AdamState& state,
          const std::vector<double>& losses) {
        std::vector<double> partial = previous_curve;
        partial.insert(partial.end(), losses.begin(), losses.end());
        save(params, state, partial);
      });
  std::vector<double> curve = previous_curve;
  curve.insert(curve.end(), result.loss_curve.begin(), result.loss_curve.end());
  save(result.params, result.optimizer, curve);
  report.iterations = result.loss_curve.size();
  if (!result.loss_curve.empty()) {
    report.initial_loss = result.loss_curve.front();
    report.final_loss = result.loss_curve.back();
  }
  return report;
}

ManipulateReport run_manipulate(const config::RunConfig& cfg) {
  cfg.validate();
  if (cfg.manipulate.factors.empty()) throw ConfigError("no manipulation factors given");
  const Paths paths = resolve(cfg);
  if (!fs::exists(paths.checkpoint)) throw ConfigError("missing checkpoint " + paths.checkpoint);
  const nn::Mlp net = formats::read_checkpoint(paths.checkpoint);
  const bool heldout = cfg.manipulate.input == "heldout";
  const train::Dataset input = load_input(heldout ? paths.heldout_embeddings : paths.train_embeddings,
                                          heldout ? paths.heldout_attributes : paths.train_attributes);
  if (input.dim != net.dim()) {
    throw ConfigError("embedding dimension " + std::to_string(input.dim) +
                      " does not match checkpoint dimension " + std::to_string(net.dim()));
  }
  ManipulateReport report;
  report.embeddings = input.size();
  report.factors = cfg.manipulate.factors;
  std::ostringstream manifest;
  manifest << "index,factor,embeddings,attributes\n";
  const fs::path manifest_dir = fs::path(paths.manifest).parent_path();
  for (std::size_t k = 0; k < cfg.manipulate.factors.size(); ++k) {
    const double factor = cfg.manipulate.factors[k];
    train::Dataset out;
    out.dim = input.dim;
    for (std::size_t n = 0; n < input.size(); ++n) {
      const auto s = flow::manipulate(net, input.row(n), input.attributes[n], factor, cfg.solver);
      out.embeddings.insert(out.embeddings.end(), s.begin(), s.end());
      out.attributes.push_back(input.attributes[n] + factor);
    }
    char name[64];
    std::snprintf(name, sizeof(name), "manip_%03zu", k);
    const std::string emb = (manifest_dir / (std::string(name) + ".cnfe")).string();
    const std::string att = (manifest_dir / (std::string(name) + "_attributes.csv")).string();
    formats::write_dataset(emb, att, out);
    manifest << k << ',' << io::format_double(factor) << ',' << name << ".cnfe," << name
             << "_attributes.csv\n";
    report.outputs.push_back(emb);
  }
  io::write_file_atomic(paths.manifest, manifest.str());
  return report;
}

AnalyzeReport run_analyze(const config::RunConfig& cfg) {
  cfg.validate();
  if (!cfg.analyze.original_sequence.empty()) return analyze_explicit(cfg);

  const Paths paths = resolve(cfg);
  const auto w = world(cfg);
  const bool heldout = cfg.manipulate.input == "heldout";
  const train::Dataset original = load_input(heldout ? paths.heldout_embeddings : paths.train_embeddings,
                                             heldout ? paths.heldout_attributes : paths.train_attributes);
  if (original.dim != w.dim) throw ConfigError("embedding dimension does not match world.dim");
  const auto manifest = read_manifest(paths.manifest);
  if (manifest.empty()) throw ConfigError("manifest lists no manipulations");

  std::vector<analysis::DeltaRecord> records;
  std::vector<double> factors, recovered, shifts;
  const std::size_t utterances = std::min(cfg.analyze.utterances, original.size());
  const std::size_t frames = cfg.analyze.frames;
  std::vector<std::vector<synth::PhonemeSegment>> segments(utterances);
  std::vector<synth::FrameEmbeddingSequence> base(utterances);
  for (std::size_t u = 0; u < utterances; ++u) {
    segments[u] = synth::gen_segments(frames, segment_seed(cfg, u));
    base[u] = synth::surrogate_synthesize(w, original.row(u), segments[u], frames, surrogate_seed(cfg, u));
    if (cfg.analyze.write_sequences) {
      char name[64];
      std::snprintf(name, sizeof(name), "utt_%03zu", u);
      formats::write_sequence(out_file(cfg, std::string("sequences/") + name + "_orig.cnfz"), base[u]);
      formats::write_segments(out_file(cfg, std::string("sequences/") + name + "_segments.csv"), segments[u]);
    }
  }
  for (std::size_t k = 0; k < manifest.size(); ++k) {
    const auto& entry = manifest[k];
    const train::Dataset manipulated = formats::read_embeddings(entry.embeddings);
    if (manipulated.dim != original.dim || manipulated.embeddings.size() != original.embeddings.size()) {
      throw ConfigError(entry.embeddings + " does not match the original embeddings' shape");
    }
    for (std::size_t n = 0; n < original.size(); ++n) {
      const double r = synth::recover_attribute(w, manipulated.row(n));
      factors.push_back(entry.factor);
      recovered.push_back(r);
      shifts.push_back(r - synth::recover_attribute(w, original.row(n)));
    }
    for (std::size_t u = 0; u < utterances; ++u) {
      const auto seq = synth::surrogate_synthesize(w, manipulated.row(u), segments[u], frames,
                                                   surrogate_seed(cfg, u));
      if (cfg.analyze.write_sequences) {
        char name[64];
        std::snprintf(name, sizeof(name), "utt_%03zu_manip_%03zu.cnfz", u, k);
        formats::write_sequence(out_file(cfg, std::string("sequences/") + name), seq);
      }
      const auto r = analysis::categorize(analysis::mae_delta(base[u], seq), segments[u], entry.factor, u);
      records.insert(records.end(), r.begin(), r.end());
    }
  }

  AnalyzeReport report;
  report.records = records.size();
  report.tables.push_back(
      analysis::summarize(records, cfg.analyze.grid, cfg.analyze.combine_signs, cfg.analyze.set_label));
  if (factors.size() >= 2) {
    report.correlations.entries.push_back(analysis::correlate("recovered_attribute", factors, recovered));
    report.correlations.entries.push_back(analysis::correlate("recovered_shift", factors, shifts));
  }
  write_reports(cfg, report, records);
  return report;
}

train::GradCheckReport run_grad_check(const config::RunConfig& cfg) {
  return train::gradient_self_test(derive_seed(cfg.seed, "grad-check"));
}

}  // namespace pvq::pipeline
