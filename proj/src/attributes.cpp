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

#include "pvqflow/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pvqflow/error.hpp"
#include "pvqflow/io.hpp"

namespace pvq::attributes {

void FrameFeatures::validate() const {
  if (energy.size() != creak_probability.size()) {
    throw DomainError("energy and creak probability tracks differ in length");
  }
  for (double e : energy) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError("frame energy must be finite and non-negative");
  }
  for (double p : creak_probability) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("creak probability must lie in [0, 1]");
  }
}

void VadConfig::validate() const {
  if (!(relative_threshold > 0.0 && relative_threshold < 1.0)) {
    throw ConfigError("VAD relative threshold must lie in (0, 1)");
  }
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw DomainError("percentile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<bool> energy_vad(const FrameFeatures& features, const VadConfig& cfg) {
  cfg.validate();
  features.validate();
  if (features.size() == 0) throw DomainError("no frames to classify");
  const double reference = cfg.reference == EnergyReference::kPeak
                               ? *std::max_element(features.energy.begin(), features.energy.end())
                               : percentile(features.energy, 95.0);
  if (!(reference > 0.0)) throw DomainError("no active frames");
  const double threshold = cfg.relative_threshold * reference;
  std::vector<bool> mask(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) mask[i] = features.energy[i] >= threshold;
  return mask;
}

double global_attribute(const FrameFeatures& features, const std::vector<bool>& mask) {
  if (mask.size() != features.creak_probability.size()) {
    throw DomainError("mask length does not match the frame count");
  }
  double sum = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double p = features.creak_probability[i];
    sum += p;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    ++n;
  }
  if (n == 0) throw DomainError("no active frames");
  // A rounded mean can land one ulp outside [min, max].
  return std::clamp(sum / static_cast<double>(n), lo, hi);
}

FrameFeatures read_frame_features(const std::string& path, double frame_rate) {
  const auto rows = io::read_dsv(path, {"frame_index", "energy", "creak_probability"});
  FrameFeatures f;
  f.frame_rate = frame_rate;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (io::parse_u64(rows[r][0]) != r) throw IoError(path + ": frame indices must be 0, 1, 2, ...");
    f.energy.push_back(io::parse_double(rows[r][1]));
    f.creak_probability.push_back(io::parse_double(rows[r][2]));
  }
  f.validate();
  return f;
}

void write_frame_features(const std::string& path, const FrameFeatures& features) {
  features.validate();
  std::ostringstream out;
  out << "frame_index,energy,creak_probability\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << i << ',' << io::format_double(features.energy[i]) << ','
        << io::format_double(features.creak_probability[i]) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

}  // namespace pvq::attributes
