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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvqflow/synthdata.hpp"

namespace pvq::analysis {

using synth::FrameEmbeddingSequence;
using synth::PhonemeClass;
using synth::PhonemeSegment;

/// Per-frame mean absolute difference (1/D) * ||z_t - z~_t||_1.
std::vector<double> mae_delta(const FrameEmbeddingSequence& original,
                              const FrameEmbeddingSequence& manipulated);

struct DeltaRecord {
  std::size_t utterance = 0;
  std::size_t frame = 0;
  double factor = 0.0;  // manipulation factor that produced the frame
  PhonemeClass cls = PhonemeClass::kVoiced;
  double value = 0.0;
};

/// Labels every frame's delta with the class of the segment covering it.
std::vector<DeltaRecord> categorize(std::span<const double> deltas,
                                    std::span<const PhonemeSegment> segments, double factor,
                                    std::size_t utterance = 0);

struct SummaryCell {
  PhonemeClass cls = PhonemeClass::kVoiced;
  double factor = 0.0;  // |factor| when signs are combined
  std::size_t n = 0;
  std::optional<double> mean;  // of delta * 100; empty when n == 0
  std::optional<double> stddev;  // population
};

struct SummaryTable {
  std::string set;
  bool combined_signs = true;
  std::vector<double> grid;
  std::vector<SummaryCell> cells;  // class-major, grid order within a class

  const SummaryCell& cell(PhonemeClass cls, double factor) const;
};

/// Mean and population standard deviation of delta * 100 per (class, grid
/// value). With combine_signs, records for +f and -f both land in cell |f|.
SummaryTable summarize(std::span<const DeltaRecord> records, std::span<const double> grid,
                       bool combine_signs, std::string set = "all");

/// Sample Pearson correlation. Throws DomainError for n < 2, mismatched
/// lengths or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of y on x.
double regression_slope(std::span<const double> x, std::span<const double> y);

struct CorrelationEntry {
  std::string feature;
  double r = 0.0;
  std::size_t n = 0;
  double slope = 0.0;
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;
};

CorrelationEntry correlate(std::string feature, std::span<const double> factors,
                           std::span<const double> values);

/// set,class,abs_factor,mean,std,n (factor instead of abs_factor for signed
/// tables). Missing cells print NA.
std::string summary_dsv(std::span<const SummaryTable> tables);
/// Same columns as summary_dsv, space-aligned.
std::string summary_text(std::span<const SummaryTable> tables);
/// One row per (set, class), one column per grid value, cells "mean ± std"
/// rounded to integers.
std::string summary_grid(std::span<const SummaryTable> tables);

/// set,utterance,frame,factor,class,delta
std::string deltas_dsv(std::span<const DeltaRecord> records, const std::string& set);
/// feature,r,n,slope
std::string correlation_dsv(const CorrelationReport& report);

}  // namespace pvq::analysis
