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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pvqflow/analysis.hpp"
#include "pvqflow/attributes.hpp"
#include "pvqflow/error.hpp"
#include "pvqflow/synthdata.hpp"
#include "support.hpp"

using namespace pvq;
using synth::PhonemeClass;
using synth::PhonemeSegment;

namespace {

constexpr auto kV = PhonemeClass::kVoiced;
constexpr auto kU = PhonemeClass::kUnvoiced;
constexpr auto kS = PhonemeClass::kSilence;

double closure_attribute(double a, const std::vector<PhonemeSegment>& segs, std::size_t frames,
                         std::uint64_t seed) {
  const auto f = synth::gen_frame_probs(a, frames, segs, seed);
  return attributes::global_attribute(f, attributes::energy_vad(f, attributes::VadConfig{}));
}

}  // namespace

TEST_CASE("world configuration") {
  const auto w = synth::SyntheticWorldConfig::make(6, 0.05, 3);
  CHECK(w.dim == 6);
  double norm = 0.0;
  for (double v : w.direction) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.base_mean == std::vector<double>(6, 0.0));
  CHECK_NOTHROW(w.validate());
  CHECK(synth::SyntheticWorldConfig::make(6, 0.05, 3).direction == w.direction);
  CHECK(synth::SyntheticWorldConfig::make(6, 0.05, 4).direction != w.direction);

  auto bad = w;
  bad.noise_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = w;
  bad.direction[0] += 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = w;
  bad.base_mean.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("speaker datasets") {
  const auto w = synth::SyntheticWorldConfig::make(5, 0.05, 1);
  SUBCASE("near-noise-free samples recover their attribute") {
    auto quiet = w;
    quiet.noise_scale = 1e-12;
    const auto d = synth::gen_speaker_dataset(quiet, 50);
    for (std::size_t n = 0; n < 50; ++n) {
      CHECK(synth::recover_attribute(quiet, d.row(n)) == doctest::Approx(d.attributes[n]).epsilon(1e-10));
    }
  }
  SUBCASE("mean recovered attribute") {
    const std::size_t n = 100000;
    const auto d = synth::gen_speaker_dataset(w, n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += synth::recover_attribute(w, d.row(i)) / n;
    const double sd = std::sqrt(1.0 / 12 + w.noise_scale * w.noise_scale);
    CHECK(std::abs(mean - 0.5) < 3 * sd / std::sqrt(double(n)));
    CHECK(*std::min_element(d.attributes.begin(), d.attributes.end()) >= 0.0);
    CHECK(*std::max_element(d.attributes.begin(), d.attributes.end()) <= 1.0);
  }
  SUBCASE("determinism and streams") {
    const auto a = synth::gen_speaker_dataset(w, 20, 0);
    const auto b = synth::gen_speaker_dataset(w, 20, 0);
    const auto c = synth::gen_speaker_dataset(w, 20, 1);
    CHECK(a.embeddings == b.embeddings);
    CHECK(a.attributes == b.attributes);
    CHECK(a.attributes != c.attributes);
    CHECK_NOTHROW(a.validate());
  }
  SUBCASE("recovery") {
    CHECK(synth::recover_attribute(w, w.base_mean) == 0.0);
    std::vector<double> s(5);
    for (int i = 0; i < 5; ++i) s[i] = 0.7 * w.direction[i];
    CHECK(synth::recover_attribute(w, s) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK_THROWS_AS(synth::recover_attribute(w, std::vector<double>(4, 0.0)), ConfigError);
  }
  CHECK_THROWS_AS(synth::gen_speaker_dataset(w, 0), DomainError);
}

TEST_CASE("phoneme classes and segments") {
  for (auto c : synth::kAllClasses) CHECK(synth::parse_class(synth::class_name(c)) == c);
  CHECK(synth::class_name(kV) == "voiced");
  CHECK_THROWS_AS(synth::parse_class("nasal"), DomainError);

  const std::vector<PhonemeSegment> ok{{kS, 0, 3}, {kV, 3, 8}, {kU, 8, 10}};
  CHECK_NOTHROW(synth::validate_segments(ok, 10));
  CHECK_THROWS_AS(synth::validate_segments(ok, 11), DomainError);
  const std::vector<PhonemeSegment> gap{{kS, 0, 3}, {kV, 4, 10}};
  CHECK_THROWS_AS(synth::validate_segments(gap, 10), DomainError);
  const std::vector<PhonemeSegment> empty_run{{kS, 0, 0}, {kV, 0, 10}};
  CHECK_THROWS_AS(synth::validate_segments(empty_run, 10), DomainError);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t frames = 20 + seed * 7;
    const auto segs = synth::gen_segments(frames, seed);
    CHECK_NOTHROW(synth::validate_segments(segs, frames));
    CHECK(std::any_of(segs.begin(), segs.end(), [](const auto& s) { return s.cls == kV; }));
    for (std::size_t i = 1; i < segs.size(); ++i) CHECK(segs[i].cls != segs[i - 1].cls);
    CHECK(segs == synth::gen_segments(frames, seed));
  }
  CHECK(synth::gen_segments(1, 3) == std::vector<PhonemeSegment>{{kV, 0, 1}});
}

TEST_CASE("frame probability tracks") {
  SUBCASE("zero attribute") {
    const std::vector<PhonemeSegment> segs{{kS, 0, 4}, {kV, 4, 20}, {kU, 20, 30}};
    const auto f = synth::gen_frame_probs(0.0, 30, segs, 1);
    for (double p : f.creak_probability) CHECK(p == 0.0);
  }
  SUBCASE("single voiced segment closes to the requested value") {
    const std::vector<PhonemeSegment> segs{{kV, 0, 40}};
    CHECK(std::abs(closure_attribute(0.4, segs, 40, 5) - 0.4) < 1e-6);
  }
  SUBCASE("infeasible requests") {
    const std::vector<PhonemeSegment> silent{{kS, 0, 10}};
    CHECK_THROWS_AS(synth::gen_frame_probs(0.3, 10, silent, 1), DomainError);
    const std::vector<PhonemeSegment> mostly_unvoiced{{kV, 0, 2}, {kU, 2, 10}};
    CHECK_THROWS_AS(synth::gen_frame_probs(0.5, 10, mostly_unvoiced, 1), DomainError);
    CHECK_NOTHROW(synth::gen_frame_probs(0.2, 10, mostly_unvoiced, 1));
    const std::vector<PhonemeSegment> voiced{{kV, 0, 10}};
    CHECK_THROWS_AS(synth::gen_frame_probs(1.2, 10, voiced, 1), DomainError);
  }
  SUBCASE("class structure of the tracks") {
    const auto segs = synth::gen_segments(200, 9);
    const auto f = synth::gen_frame_probs(0.35, 200, segs, 9);
    const auto mask = attributes::energy_vad(f, attributes::VadConfig{});
    for (const auto& s : segs) {
      for (std::size_t t = s.start; t < s.end; ++t) {
        CHECK(f.creak_probability[t] >= 0.0);
        CHECK(f.creak_probability[t] <= 1.0);
        if (s.cls != kV) CHECK(f.creak_probability[t] == 0.0);
        CHECK(mask[t] == (s.cls != kS));
      }
    }
  }
  SUBCASE("closure over random cases") {
    std::mt19937_64 gen(10);
    for (int i = 0; i < 50; ++i) {
      const std::size_t frames = 100 + gen() % 200;
      const auto segs = synth::gen_segments(frames, i);
      std::size_t voiced = 0, active = 0;
      for (const auto& s : segs) {
        if (s.cls == kV) voiced += s.end - s.start;
        if (s.cls != kS) active += s.end - s.start;
      }
      const double a = testing::uniform(gen, 0.0, double(voiced) / active);
      CHECK(std::abs(closure_attribute(a, segs, frames, i) - a) < 1e-6);
    }
  }
}

TEST_CASE("surrogate decoder") {
  const auto w = synth::SyntheticWorldConfig::make(8, 0.05, 2);
  const std::vector<PhonemeSegment> segs{{kS, 0, 5}, {kV, 5, 25}, {kU, 25, 35}, {kS, 35, 40}};
  std::mt19937_64 gen(4);
  const auto s = testing::normal_vector(gen, 8);

  CHECK(synth::surrogate_gain(kV).along_direction == 1.0);
  CHECK(synth::surrogate_gain(kU).along_direction == 0.25);
  CHECK(synth::surrogate_gain(kS).along_direction == 0.0);
  CHECK(synth::surrogate_gain(kS).orthogonal == 0.0);

  const auto z1 = synth::surrogate_synthesize(w, s, segs, 40, 77);
  CHECK(z1 == synth::surrogate_synthesize(w, s, segs, 40, 77));
  CHECK(z1.dim == 8);
  CHECK(z1.frames == 40);
  CHECK(z1.segments == segs);

  auto shifted = s;
  for (int i = 0; i < 8; ++i) shifted[i] += 0.3 * w.direction[i];
  const auto z2 = synth::surrogate_synthesize(w, shifted, segs, 40, 77);
  for (std::size_t t : {0u, 4u, 35u, 39u}) {
    const auto a = z1.frame(t), b = z2.frame(t);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  const auto other = synth::surrogate_synthesize(w, testing::normal_vector(gen, 8), segs, 40, 77);
  CHECK(std::equal(z1.frame(2).begin(), z1.frame(2).end(), other.frame(2).begin()));

  const auto deltas = analysis::mae_delta(z1, z2);
  double voiced = 0.0, unvoiced = 0.0;
  for (std::size_t t = 5; t < 25; ++t) voiced += deltas[t] / 20;
  for (std::size_t t = 25; t < 35; ++t) unvoiced += deltas[t] / 10;
  CHECK(voiced / unvoiced == doctest::Approx(4.0).epsilon(1e-9));
  // Delta along the direction: (1/D) * 0.3 * sum |v_d|.
  double l1 = 0.0;
  for (double v : w.direction) l1 += std::abs(v);
  CHECK(voiced == doctest::Approx(0.3 * l1 / 8).epsilon(1e-9));

  CHECK_THROWS_AS(synth::surrogate_synthesize(w, std::vector<double>(3, 0.0), segs, 40, 1), ConfigError);
  CHECK_THROWS_AS(synth::surrogate_synthesize(w, s, segs, 41, 1), DomainError);
}
