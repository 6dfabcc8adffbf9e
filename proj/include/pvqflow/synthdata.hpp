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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pvqflow/attributes.hpp"
#include "pvqflow/training.hpp"

namespace pvq::synth {

/// Linear ground-truth world: s = base_mean + a * direction + noise_scale * eps.
struct SyntheticWorldConfig {
  std::size_t dim = 16;
  std::vector<double> direction;  // unit vector
  std::vector<double> base_mean;
  double noise_scale = 0.05;
  std::uint64_t seed = 0;

  /// Random unit direction and zero mean, both derived from seed.
  static SyntheticWorldConfig make(std::size_t dim, double noise_scale, std::uint64_t seed);
  void validate() const;
};

/// Draws N pairs with a ~ U[0, 1]. Different streams give independent sets
/// from the same world (e.g. training and held-out data).
train::Dataset gen_speaker_dataset(const SyntheticWorldConfig& cfg, std::size_t n,
                                   std::uint64_t stream = 0);

/// <s - base_mean, direction>.
double recover_attribute(const SyntheticWorldConfig& cfg, std::span<const double> s);

enum class PhonemeClass : int { kVoiced = 0, kUnvoiced = 1, kSilence = 2 };
inline constexpr PhonemeClass kAllClasses[] = {PhonemeClass::kVoiced, PhonemeClass::kUnvoiced,
                                               PhonemeClass::kSilence};

std::string_view class_name(PhonemeClass c);
PhonemeClass parse_class(std::string_view name);

/// Half-open frame range [start, end).
struct PhonemeSegment {
  PhonemeClass cls = PhonemeClass::kVoiced;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const PhonemeSegment&) const = default;
};

/// Throws DomainError unless the segments are ordered, non-empty and cover
/// [0, frames) exactly once.
void validate_segments(std::span<const PhonemeSegment> segments, std::size_t frames);

/// Random utterance-like segmentation of [0, frames): leading silence, then
/// runs of voiced, unvoiced and silence. Always contains a voiced frame.
std::vector<PhonemeSegment> gen_segments(std::size_t frames, std::uint64_t seed);

/// Frame tracks whose VAD-masked mean creak probability equals a. Creak is
/// confined to voiced frames; silence frames carry near-zero energy. Throws
/// DomainError if a cannot be reached with the given voiced fraction.
attributes::FrameFeatures gen_frame_probs(double a, std::size_t frames,
                                          std::span<const PhonemeSegment> segments,
                                          std::uint64_t seed);

/// D x T latent frame sequence stored frame-major (frame t occupies
/// data[t * dim, (t + 1) * dim)).
struct FrameEmbeddingSequence {
  std::size_t dim = 0;
  std::size_t frames = 0;
  std::vector<double> data;
  std::vector<PhonemeSegment> segments;

  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(data).subspan(t * dim, dim);
  }
  bool operator==(const FrameEmbeddingSequence&) const = default;
};

/// Per-class gains of the surrogate decoder.
struct ClassGain {
  double along_direction;
  double orthogonal;
};
ClassGain surrogate_gain(PhonemeClass c);

/// Stand-in for a TTS decoder: z_t = A_c s + b_c + eta_t, where A_c scales the
/// component of s along the attribute direction by gain.along_direction and
/// the rest by gain.orthogonal. b_c and eta_t depend only on seed (and t), so
/// two calls that differ only in s differ only through A_c s.
FrameEmbeddingSequence surrogate_synthesize(const SyntheticWorldConfig& cfg,
                                            std::span<const double> s,
                                            std::span<const PhonemeSegment> segments,
                                            std::size_t frames, std::uint64_t seed);

}  // namespace pvq::synth
