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

#include <cmath>
#include <random>

#include "pvqflow/analysis.hpp"
#include "pvqflow/error.hpp"
#include "support.hpp"

using namespace pvq;
using analysis::DeltaRecord;
using synth::FrameEmbeddingSequence;
using synth::PhonemeClass;
using synth::PhonemeSegment;

namespace {

constexpr auto kV = PhonemeClass::kVoiced;
constexpr auto kU = PhonemeClass::kUnvoiced;
constexpr auto kS = PhonemeClass::kSilence;

FrameEmbeddingSequence sequence(std::size_t dim, std::size_t frames, std::vector<double> data) {
  return {dim, frames, std::move(data), {{kV, 0, frames}}};
}

const std::vector<double> kGrid{0.25, 0.5, 0.75, 1.0};

}  // namespace

TEST_CASE("frame-wise mean absolute difference") {
  const auto a = sequence(2, 1, {1.0, 2.0});
  const auto b = sequence(2, 1, {2.0, 4.0});
  CHECK(analysis::mae_delta(a, b) == std::vector<double>{1.5});
  CHECK(analysis::mae_delta(a, a) == std::vector<double>{0.0});

  std::mt19937_64 gen(3);
  const auto x = sequence(3, 5, testing::normal_vector(gen, 15));
  const auto y = sequence(3, 5, testing::normal_vector(gen, 15));
  const auto d = analysis::mae_delta(x, y);
  for (double lambda : {-2.5, 0.5, 3.0}) {
    auto xs = x, ys = y;
    for (auto& v : xs.data) v *= lambda;
    for (auto& v : ys.data) v *= lambda;
    const auto ds = analysis::mae_delta(xs, ys);
    for (std::size_t t = 0; t < 5; ++t) CHECK(ds[t] == doctest::Approx(std::abs(lambda) * d[t]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(analysis::mae_delta(a, sequence(1, 2, {1.0, 2.0})), ConfigError);
  CHECK_THROWS_AS(analysis::mae_delta(a, sequence(2, 2, {1, 2, 3, 4})), ConfigError);
}

TEST_CASE("categorization") {
  const std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const std::vector<PhonemeSegment> one{{kV, 0, 6}};
  for (const auto& r : analysis::categorize(deltas, one, 0.5)) CHECK(r.cls == kV);

  const std::vector<PhonemeSegment> three{{kS, 0, 1}, {kV, 1, 4}, {kU, 4, 6}};
  const auto recs = analysis::categorize(deltas, three, -0.75, 3);
  REQUIRE(recs.size() == 6);
  const PhonemeClass expected[] = {kS, kV, kV, kV, kU, kU};
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(recs[t].cls == expected[t]);
    CHECK(recs[t].frame == t);
    CHECK(recs[t].value == deltas[t]);
    CHECK(recs[t].factor == -0.75);
    CHECK(recs[t].utterance == 3);
  }
  CHECK(analysis::categorize({}, {}, 1.0).empty());
  const std::vector<PhonemeSegment> short_cover{{kV, 0, 4}};
  CHECK_THROWS_AS(analysis::categorize(deltas, short_cover, 1.0), DomainError);
}

TEST_CASE("summary statistics") {
  SUBCASE("constant records") {
    std::vector<DeltaRecord> r;
    for (int i = 0; i < 5; ++i) r.push_back({0, std::size_t(i), 0.5, kV, 0.05});
    const auto t = analysis::summarize(r, kGrid, true);
    const auto& c = t.cell(kV, 0.5);
    CHECK(*c.mean == doctest::Approx(5.0));
    CHECK(*c.stddev == 0.0);
    CHECK(c.n == 5);
  }
  SUBCASE("population standard deviation") {
    const std::vector<DeltaRecord> r{{0, 0, 1.0, kU, 0.1}, {0, 1, 1.0, kU, 0.3}};
    const auto c = analysis::summarize(r, kGrid, false).cell(kU, 1.0);
    CHECK(*c.mean == doctest::Approx(20.0));
    CHECK(*c.stddev == doctest::Approx(10.0));
  }
  SUBCASE("missing cells are reported as missing") {
    const std::vector<DeltaRecord> r{{0, 0, 1.0, kU, 0.1}};
    const auto t = analysis::summarize(r, kGrid, true);
    CHECK(t.cells.size() == 3 * kGrid.size());
    CHECK_FALSE(t.cell(kV, 0.25).mean.has_value());
    CHECK(t.cell(kV, 0.25).n == 0);
    CHECK(analysis::summary_dsv(std::vector{t}).find("voiced,0.25,NA,NA,0") != std::string::npos);
    CHECK_THROWS_AS(t.cell(kV, 0.3), DomainError);
  }
  SUBCASE("combining signs pools the multiset") {
    std::mt19937_64 gen(5);
    std::vector<DeltaRecord> signed_records, pooled;
    for (int i = 0; i < 200; ++i) {
      const double f = kGrid[gen() % 4] * (gen() % 2 ? 1.0 : -1.0);
      const auto cls = synth::kAllClasses[gen() % 3];
      const double v = testing::uniform(gen, 0.0, 0.4);
      signed_records.push_back({0, std::size_t(i), f, cls, v});
      pooled.push_back({0, std::size_t(i), std::abs(f), cls, v});
    }
    const auto a = analysis::summarize(signed_records, kGrid, true);
    const auto b = analysis::summarize(pooled, kGrid, false);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      CHECK(a.cells[i].n == b.cells[i].n);
      CHECK(*a.cells[i].mean == doctest::Approx(*b.cells[i].mean).epsilon(1e-12));
      CHECK(*a.cells[i].stddev == doctest::Approx(*b.cells[i].stddev).epsilon(1e-12));
    }
    const auto s = analysis::summarize(signed_records, std::vector<double>{-1.0, 1.0}, false);
    CHECK(s.cell(kV, -1.0).n + s.cell(kV, 1.0).n == a.cell(kV, 1.0).n);
  }
}

TEST_CASE("grid layout with sign-combined cells") {
  const std::vector<DeltaRecord> r{{0, 0, 1.0, kV, 0.08},
                                   {0, 1, -1.0, kV, 0.38},
                                   {0, 2, 1.0, kU, 0.02},
                                   {0, 3, -1.0, kU, 0.14}};
  const std::vector<analysis::SummaryTable> t{analysis::summarize(r, kGrid, true, "seen")};
  CHECK(*t[0].cell(kV, 1.0).mean == doctest::Approx(23.0));
  CHECK(*t[0].cell(kV, 1.0).stddev == doctest::Approx(15.0));
  CHECK(*t[0].cell(kU, 1.0).mean == doctest::Approx(8.0));
  CHECK(*t[0].cell(kU, 1.0).stddev == doctest::Approx(6.0));
  const std::string expected =
      "set   class     0.25  0.5  0.75      1.0\n"
      "seen  voiced       -    -     -  23 ± 15\n"
      "seen  unvoiced     -    -     -    8 ± 6\n"
      "seen  silence      -    -     -        -\n";
  CHECK(analysis::summary_grid(t) == expected);
  const std::string dsv = analysis::summary_dsv(t);
  CHECK(dsv.rfind("set,class,abs_factor,mean,std,n\n", 0) == 0);
  CHECK(dsv.find("seen,voiced,1,23,15,2\n") != std::string::npos);
  CHECK(analysis::summary_text(t).rfind("set   class     |factor|    mean     std  n\n", 0) == 0);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> x{1, 2, 3};
  CHECK(analysis::pearson(x, std::vector<double>{6, 4, 5}) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(analysis::pearson(x, std::vector<double>{5, 7, 9}) == doctest::Approx(1.0));
  CHECK(analysis::pearson(x, std::vector<double>{-1, -2, -3}) == doctest::Approx(-1.0));
  CHECK(analysis::regression_slope(x, std::vector<double>{6, 4, 5}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(analysis::pearson(x, std::vector<double>{2, 2, 2}), DomainError);
  CHECK_THROWS_AS(analysis::pearson(std::vector<double>{1}, std::vector<double>{1}), DomainError);
  CHECK_THROWS_AS(analysis::pearson(x, std::vector<double>{1, 2}), DomainError);

  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto u = testing::normal_vector(gen, 20), v = testing::normal_vector(gen, 20);
    for (int i = 0; i < 20; ++i) v[i] += 0.5 * u[i];
    const double r = analysis::pearson(u, v);
    CHECK(std::abs(r) <= 1.0);
    const double scale = testing::uniform(gen, 0.1, 10), shift = testing::uniform(gen, -5, 5);
    auto w = u, neg = v;
    for (auto& e : w) e = scale * e + shift;
    for (auto& e : neg) e = -e;
    CHECK(analysis::pearson(w, v) == doctest::Approx(r).epsilon(1e-12));
    CHECK(analysis::pearson(u, neg) == doctest::Approx(-r).epsilon(1e-12));
  }
  const auto e = analysis::correlate("recovered_attribute", x, std::vector<double>{2, 4, 6.5});
  CHECK(e.n == 3);
  CHECK(e.feature == "recovered_attribute");
  CHECK(e.slope == doctest::Approx(2.25));
  CHECK(analysis::correlation_dsv({{e}}).rfind("feature,r,n,slope\nrecovered_attribute,", 0) == 0);
}

TEST_CASE("delta records as DSV") {
  const std::vector<DeltaRecord> r{{2, 7, -0.25, kU, 0.125}};
  CHECK(analysis::deltas_dsv(r, "unseen") == "set,utterance,frame,factor,class,delta\nunseen,2,7,-0.25,unvoiced,0.125\n");
}
