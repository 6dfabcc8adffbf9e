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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pvq::attributes {

/// Per-frame energy and creak probability.
struct FrameFeatures {
  std::vector<double> energy;
  std::vector<double> creak_probability;
  double frame_rate = 100.0;  // frames per second

  std::size_t size() const noexcept { return energy.size(); }
  void validate() const;
};

enum class EnergyReference { kPeak, kPercentile95 };

struct VadConfig {
  double relative_threshold = 0.05;
  EnergyReference reference = EnergyReference::kPercentile95;

  void validate() const;
};

/// Linear-interpolation percentile (q in [0, 100]) of a non-empty sample.
double percentile(std::span<const double> values, double q);

/// Frame i is active iff energy_i >= relative_threshold * reference energy.
/// Throws DomainError on empty input or when no frame carries energy.
std::vector<bool> energy_vad(const FrameFeatures& features, const VadConfig& cfg);

/// Mean creak probability over active frames.
double global_attribute(const FrameFeatures& features, const std::vector<bool>& mask);

/// Reads `frame_index,energy,creak_probability` rows.
FrameFeatures read_frame_features(const std::string& path, double frame_rate = 100.0);
void write_frame_features(const std::string& path, const FrameFeatures& features);

}  // namespace pvq::attributes
