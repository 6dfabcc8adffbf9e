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

#include "pvqflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pvqflow/error.hpp"
#include "pvqflow/io.hpp"

namespace pvq::analysis {
namespace {

constexpr double kGridTolerance = 1e-9;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  // Width counts code points so the UTF-8 "±" lines up.
  std::size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80;
  if (len >= width) return s;
  const std::string fill(width - len, ' ');
  return left ? s + fill : fill + s;
}

std::string render_aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::size_t len = 0;
      for (unsigned char ch : row[c]) len += (ch & 0xC0) != 0x80;
      width[c] = std::max(width[c], len);
    }
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += pad(row[c], width[c], c < 2);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

std::vector<double> mae_delta(const FrameEmbeddingSequence& original,
                              const FrameEmbeddingSequence& manipulated) {
  if (original.dim != manipulated.dim || original.frames != manipulated.frames) {
    throw ConfigError("sequences differ in shape: " + std::to_string(original.dim) + "x" +
                      std::to_string(original.frames) + " vs " + std::to_string(manipulated.dim) +
                      "x" + std::to_string(manipulated.frames));
  }
  if (original.data.size() != original.dim * original.frames ||
      manipulated.data.size() != manipulated.dim * manipulated.frames) {
    throw ConfigError("sequence data does not match its shape");
  }
  std::vector<double> out(original.frames, 0.0);
  for (std::size_t t = 0; t < original.frames; ++t) {
    const auto a = original.frame(t);
    const auto b = manipulated.frame(t);
    double acc = 0.0;
    for (std::size_t d = 0; d < original.dim; ++d) acc += std::abs(a[d] - b[d]);
    out[t] = acc / static_cast<double>(original.dim);
  }
  return out;
}

std::vector<DeltaRecord> categorize(std::span<const double> deltas,
                                    std::span<const PhonemeSegment> segments, double factor,
                                    std::size_t utterance) {
  std::vector<DeltaRecord> out;
  if (deltas.empty()) return out;
  synth::validate_segments(segments, deltas.size());
  out.reserve(deltas.size());
  for (const PhonemeSegment& s : segments) {
    for (std::size_t t = s.start; t < s.end; ++t) {
      if (!(deltas[t] >= 0.0) || !std::isfinite(deltas[t])) {
        throw DomainError("delta at frame " + std::to_string(t) + " is not a finite non-negative value");
      }
      out.push_back({utterance, t, factor, s.cls, deltas[t]});
    }
  }
  return out;
}

const SummaryCell& SummaryTable::cell(PhonemeClass cls, double factor) const {
  for (const SummaryCell& c : cells) {
    if (c.cls == cls && std::abs(c.factor - factor) <= kGridTolerance) return c;
  }
  throw DomainError("no summary cell for the requested class and factor");
}

SummaryTable summarize(std::span<const DeltaRecord> records, std::span<const double> grid,
                       bool combine_signs, std::string set) {
  SummaryTable table;
  table.set = std::move(set);
  table.combined_signs = combine_signs;
  table.grid.assign(grid.begin(), grid.end());
  for (PhonemeClass cls : synth::kAllClasses) {
    for (double g : grid) {
      SummaryCell cell;
      cell.cls = cls;
      cell.factor = g;
      std::vector<double> values;
      for (const DeltaRecord& r : records) {
        const double key = combine_signs ? std::abs(r.factor) : r.factor;
        if (r.cls == cls && std::abs(key - g) <= kGridTolerance) values.push_back(r.value * 100.0);
      }
      cell.n = values.size();
      if (!values.empty()) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        cell.mean = mean;
        cell.stddev = std::sqrt(var);
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("correlation inputs differ in length");
  if (x.size() < 2) throw DomainError("correlation needs at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("correlation is undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs two equal-length samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw DomainError("slope is undefined for a constant regressor");
  return sxy / sxx;
}

CorrelationEntry correlate(std::string feature, std::span<const double> factors,
                           std::span<const double> values) {
  return {std::move(feature), pearson(factors, values), factors.size(),
          regression_slope(factors, values)};
}

std::string summary_dsv(std::span<const SummaryTable> tables) {
  std::ostringstream out;
  const bool combined = tables.empty() || tables.front().combined_signs;
  out << "set,class," << (combined ? "abs_factor" : "factor") << ",mean,std,n\n";
  for (const SummaryTable& t : tables) {
    for (const SummaryCell& c : t.cells) {
      out << t.set << ',' << synth::class_name(c.cls) << ',' << io::format_double(c.factor) << ','
          << (c.mean ? io::format_double(*c.mean) : "NA") << ','
          << (c.stddev ? io::format_double(*c.stddev) : "NA") << ',' << c.n << '\n';
    }
  }
  return out.str();
}

std::string summary_text(std::span<const SummaryTable> tables) {
  const bool combined = tables.empty() || tables.front().combined_signs;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"set", "class", combined ? "|factor|" : "factor", "mean", "std", "n"});
  for (const SummaryTable& t : tables) {
    for (const SummaryCell& c : t.cells) {
      rows.push_back({t.set, std::string(synth::class_name(c.cls)), fixed(c.factor, 2),
                      c.mean ? fixed(*c.mean, 3) : "NA", c.stddev ? fixed(*c.stddev, 3) : "NA",
                      std::to_string(c.n)});
    }
  }
  return render_aligned(rows);
}

std::string summary_grid(std::span<const SummaryTable> tables) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"set", "class"};
  if (!tables.empty()) {
    for (double g : tables.front().grid) {
      std::string label = io::format_double(g);
      if (label.find_first_of(".eE") == std::string::npos) label += ".0";
      header.push_back(label);
    }
  }
  rows.push_back(header);
  for (const SummaryTable& t : tables) {
    for (PhonemeClass cls : synth::kAllClasses) {
      std::vector<std::string> row{t.set, std::string(synth::class_name(cls))};
      for (double g : t.grid) {
        const SummaryCell& c = t.cell(cls, g);
        row.push_back(c.mean ? fixed(*c.mean, 0) + " ± " + fixed(*c.stddev, 0) : "-");
      }
      rows.push_back(row);
    }
  }
  return render_aligned(rows);
}

std::string deltas_dsv(std::span<const DeltaRecord> records, const std::string& set) {
  std::ostringstream out;
  out << "set,utterance,frame,factor,class,delta\n";
  for (const DeltaRecord& r : records) {
    out << set << ',' << r.utterance << ',' << r.frame << ',' << io::format_double(r.factor) << ','
        << synth::class_name(r.cls) << ',' << io::format_double(r.value) << '\n';
  }
  return out.str();
}

std::string correlation_dsv(const CorrelationReport& report) {
  std::ostringstream out;
  out << "feature,r,n,slope\n";
  for (const CorrelationEntry& e : report.entries) {
    out << e.feature << ',' << io::format_double(e.r) << ',' << e.n << ','
        << io::format_double(e.slope) << '\n';
  }
  return out.str();
}

}  // namespace pvq::analysis
