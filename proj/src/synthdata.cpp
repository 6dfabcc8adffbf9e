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

#include "pvqflow/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pvqflow/error.hpp"
#include "pvqflow/rng.hpp"

namespace pvq::synth {
namespace {

constexpr double kSurrogateNoise = 0.1;

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace

SyntheticWorldConfig SyntheticWorldConfig::make(std::size_t dim, double noise_scale,
                                                std::uint64_t seed) {
  if (dim == 0) throw ConfigError("world dimension must be positive");
  SyntheticWorldConfig cfg;
  cfg.dim = dim;
  cfg.noise_scale = noise_scale;
  cfg.seed = seed;
  std::mt19937_64 gen(derive_seed(seed, "world-direction"));
  std::normal_distribution<double> normal(0.0, 1.0);
  cfg.direction.resize(dim);
  double norm = 0.0;
  do {
    for (double& v : cfg.direction) v = normal(gen);
    norm = std::sqrt(dot(cfg.direction, cfg.direction));
  } while (norm < 1e-6);
  for (double& v : cfg.direction) v /= norm;
  cfg.base_mean.assign(dim, 0.0);
  cfg.validate();
  return cfg;
}

void SyntheticWorldConfig::validate() const {
  if (dim == 0) throw ConfigError("world dimension must be positive");
  if (direction.size() != dim || base_mean.size() != dim) {
    throw ConfigError("direction and base mean must have length dim");
  }
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError("noise scale must be positive");
  }
  if (std::abs(std::sqrt(dot(direction, direction)) - 1.0) > 1e-9) {
    throw ConfigError("attribute direction must be a unit vector");
  }
}

train::Dataset gen_speaker_dataset(const SyntheticWorldConfig& cfg, std::size_t n,
                                   std::uint64_t stream) {
  cfg.validate();
  if (n == 0) throw DomainError("dataset size must be at least 1");
  std::mt19937_64 gen(hash_counter({cfg.seed, stream}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  train::Dataset data;
  data.dim = cfg.dim;
  data.attributes.reserve(n);
  data.embeddings.reserve(n * cfg.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = unit(gen);
    data.attributes.push_back(a);
    for (std::size_t d = 0; d < cfg.dim; ++d) {
      data.embeddings.push_back(cfg.base_mean[d] + a * cfg.direction[d] +
                                cfg.noise_scale * normal(gen));
    }
  }
  return data;
}

double recover_attribute(const SyntheticWorldConfig& cfg, std::span<const double> s) {
  if (s.size() != cfg.dim) throw ConfigError("embedding length does not match the world");
  double acc = 0.0;
  for (std::size_t d = 0; d < cfg.dim; ++d) acc += (s[d] - cfg.base_mean[d]) * cfg.direction[d];
  return acc;
}

std::string_view class_name(PhonemeClass c) {
  switch (c) {
    case PhonemeClass::kVoiced: return "voiced";
    case PhonemeClass::kUnvoiced: return "unvoiced";
    case PhonemeClass::kSilence: return "silence";
  }
  return "unknown";
}

PhonemeClass parse_class(std::string_view name) {
  for (PhonemeClass c : kAllClasses) {
    if (class_name(c) == name) return c;
  }
  throw DomainError("unknown phoneme class '" + std::string(name) + "'");
}

void validate_segments(std::span<const PhonemeSegment> segments, std::size_t frames) {
  std::size_t expected = 0;
  for (const PhonemeSegment& s : segments) {
    if (s.start != expected) {
      throw DomainError("segments must be ordered and contiguous; gap or overlap at frame " +
                        std::to_string(expected));
    }
    if (s.end <= s.start) throw DomainError("segment end must exceed its start");
    expected = s.end;
  }
  if (expected != frames) {
    throw DomainError("segments cover " + std::to_string(expected) + " of " +
                      std::to_string(frames) + " frames");
  }
}

std::vector<PhonemeSegment> gen_segments(std::size_t frames, std::uint64_t seed) {
  if (frames == 0) throw DomainError("frame count must be positive");
  std::mt19937_64 gen(derive_seed(seed, "segments"));
  auto uniform_int = [&gen](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  std::vector<PhonemeSegment> segs;
  auto push = [&segs](PhonemeClass c, std::size_t start, std::size_t end) {
    if (!segs.empty() && segs.back().cls == c) {
      segs.back().end = end;
    } else {
      segs.push_back({c, start, end});
    }
  };
  std::size_t t = 0;
  if (frames >= 8) {
    const std::size_t len = uniform_int(2, 6);
    push(PhonemeClass::kSilence, 0, len);
    t = len;
  }
  bool first = true;
  while (t < frames) {
    PhonemeClass c = PhonemeClass::kVoiced;
    if (!first) {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      c = u < 0.55 ? PhonemeClass::kVoiced : (u < 0.85 ? PhonemeClass::kUnvoiced : PhonemeClass::kSilence);
    }
    first = false;
    std::size_t len = 0;
    switch (c) {
      case PhonemeClass::kVoiced: len = uniform_int(4, 15); break;
      case PhonemeClass::kUnvoiced: len = uniform_int(2, 8); break;
      case PhonemeClass::kSilence: len = uniform_int(3, 10); break;
    }
    const std::size_t end = std::min(frames, t + len);
    push(c, t, end);
    t = end;
  }
  return segs;
}

attributes::FrameFeatures gen_frame_probs(double a, std::size_t frames,
                                          std::span<const PhonemeSegment> segments,
                                          std::uint64_t seed) {
  validate_segments(segments, frames);
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("attribute must lie in [0, 1]");
  std::vector<PhonemeClass> cls(frames);
  std::size_t n_voiced = 0;
  std::size_t n_unvoiced = 0;
  for (const PhonemeSegment& s : segments) {
    for (std::size_t t = s.start; t < s.end; ++t) cls[t] = s.cls;
    const std::size_t len = s.end - s.start;
    if (s.cls == PhonemeClass::kVoiced) n_voiced += len;
    if (s.cls == PhonemeClass::kUnvoiced) n_unvoiced += len;
  }
  // Voiced and unvoiced frames pass the VAD; only voiced frames carry creak.
  double voiced_mean = 0.0;
  if (a > 0.0) {
    if (n_voiced == 0) throw DomainError("attribute > 0 needs at least one voiced frame");
    voiced_mean = a * static_cast<double>(n_voiced + n_unvoiced) / static_cast<double>(n_voiced);
    if (voiced_mean > 1.0 + 1e-12) {
      throw DomainError("attribute " + std::to_string(a) + " is not reachable with a voiced fraction of " +
                        std::to_string(static_cast<double>(n_voiced) / static_cast<double>(n_voiced + n_unvoiced)));
    }
    voiced_mean = std::min(voiced_mean, 1.0);
  }

  std::mt19937_64 gen(derive_seed(seed, "frame-probs"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  attributes::FrameFeatures f;
  f.energy.resize(frames);
  f.creak_probability.assign(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    switch (cls[t]) {
      case PhonemeClass::kVoiced: f.energy[t] = 0.5 + 0.5 * unit(gen); break;
      case PhonemeClass::kUnvoiced: f.energy[t] = 0.2 + 0.3 * unit(gen); break;
      case PhonemeClass::kSilence: f.energy[t] = 1e-4 * unit(gen); break;
    }
  }
  if (n_voiced > 0) {
    // Zero-mean jitter scaled to stay inside [0, 1].
    std::vector<double> jitter;
    jitter.reserve(n_voiced);
    for (std::size_t i = 0; i < n_voiced; ++i) jitter.push_back(2.0 * unit(gen) - 1.0);
    double mean = 0.0;
    for (double j : jitter) mean += j;
    mean /= static_cast<double>(n_voiced);
    double peak = 0.0;
    for (double& j : jitter) {
      j -= mean;
      peak = std::max(peak, std::abs(j));
    }
    const double room = std::min(voiced_mean, 1.0 - voiced_mean);
    const double scale = peak > 0.0 ? 0.9 * room / peak : 0.0;
    std::size_t i = 0;
    for (std::size_t t = 0; t < frames; ++t) {
      if (cls[t] != PhonemeClass::kVoiced) continue;
      f.creak_probability[t] = std::clamp(voiced_mean + scale * jitter[i++], 0.0, 1.0);
    }
  }
  return f;
}

ClassGain surrogate_gain(PhonemeClass c) {
  switch (c) {
    case PhonemeClass::kVoiced: return {1.0, 1.0};
    case PhonemeClass::kUnvoiced: return {0.25, 1.0};
    case PhonemeClass::kSilence: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

FrameEmbeddingSequence surrogate_synthesize(const SyntheticWorldConfig& cfg,
                                            std::span<const double> s,
                                            std::span<const PhonemeSegment> segments,
                                            std::size_t frames, std::uint64_t seed) {
  cfg.validate();
  validate_segments(segments, frames);
  if (s.size() != cfg.dim) throw ConfigError("embedding length does not match the world");
  const std::size_t dim = cfg.dim;
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> offsets(3 * dim);
  for (PhonemeClass c : kAllClasses) {
    std::mt19937_64 gen(hash_counter({seed, 0x6f6666ULL, static_cast<std::uint64_t>(c)}));
    normal.reset();
    for (std::size_t d = 0; d < dim; ++d) offsets[static_cast<std::size_t>(c) * dim + d] = normal(gen);
  }
  const double along = dot(s, cfg.direction);

  FrameEmbeddingSequence seq;
  seq.dim = dim;
  seq.frames = frames;
  seq.segments.assign(segments.begin(), segments.end());
  seq.data.resize(frames * dim);
  for (const PhonemeSegment& segment : segments) {
    const ClassGain g = surrogate_gain(segment.cls);
    const double* b = offsets.data() + static_cast<std::size_t>(segment.cls) * dim;
    for (std::size_t t = segment.start; t < segment.end; ++t) {
      std::mt19937_64 gen(hash_counter({seed, 0x657461ULL, t}));
      normal.reset();
      double* z = seq.data.data() + t * dim;
      for (std::size_t d = 0; d < dim; ++d) {
        const double parallel = along * cfg.direction[d];
        const double signal = g.orthogonal * (s[d] - parallel) + g.along_direction * parallel;
        z[d] = signal + b[d] + kSurrogateNoise * normal(gen);
      }
    }
  }
  return seq;
}

}  // namespace pvq::synth
