#include "oracles.hpp"

#include "rsc/error.hpp"
#include "rsc/kde.hpp"

#include <doctest.h>

#include <random>

using namespace rsc;

TEST_CASE("silverman bandwidth follows the rule of thumb")
{
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto y = oracle::lognormal_sample(seed, 257);
    const Sample s(y);
    CHECK(bandwidth(s.sorted(), KdeConfig::silverman()) == doctest::Approx(oracle::silverman(y)).epsilon(1e-12));
  }
  // IQR zero but spread present: falls back to sd
  const std::vector<double> y{ 1, 1, 1, 1, 1, 1, 5 };
  CHECK(bandwidth(Sample(y).sorted(), {}) == doctest::Approx(oracle::silverman(y)));
  CHECK_THROWS_AS(bandwidth(Sample({ 2, 2, 2 }).sorted(), {}), Error);
  CHECK(bandwidth(Sample({ 2, 2, 2 }).sorted(), KdeConfig::fixed(0.3)) == 0.3);
  CHECK_THROWS_AS(KdeConfig::fixed(0.0), Error);
}

TEST_CASE("kde_at")
{
  SUBCASE("degenerate sample")
  {
    try {
      const double p[1] = { 0.0 };
      kde_at(Sample({ 0, 0, 0 }), p, {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateBandwidth);
    }
  }
  SUBCASE("standard normal at zero")
  {
    std::mt19937_64 g(4);
    std::normal_distribution<double> d;
    std::vector<double> y(100000);
    for (auto& v : y)
      v = d(g);
    const double p[1] = { 0.0 };
    CHECK(std::abs(kde_at(Sample(y), p, {})[0] - 0.3989) < 0.02);
  }
  SUBCASE("symmetry and the direct formula")
  {
    const Sample s({ -1, 0, 1 });
    const double p[4] = { 0.3, -0.3, 2.5, -2.5 };
    const auto f = kde_at(s, p, KdeConfig::fixed(1.0));
    CHECK(f[0] == f[1]);
    CHECK(f[2] == f[3]);
    CHECK(f[0] == doctest::Approx(oracle::kde({ -1, 0, 1 }, 1.0, 0.3)).epsilon(1e-14));
  }
}

TEST_CASE("direct kernel sums match the pairwise definition")
{
  const auto y = oracle::lognormal_sample(8, 700);
  const Sample s(y);
  const double h = 0.21;
  const auto s0 = gauss_sums(s.sorted(), h, SumMethod::Direct);
  const auto m = gauss_moments(s.sorted(), h, SumMethod::Direct);
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < s.size(); i += 7) {
    double r0 = 0, r2 = 0, r4 = 0, r6 = 0;
    for (double v : s.sorted()) {
      const double t = (s.sorted()[i] - v) / h;
      const double e = std::exp(-0.5 * t * t);
      r0 += e;
      r2 += e * t * t;
      r4 += e * std::pow(t, 4);
      r6 += e * std::pow(t, 6);
    }
    CHECK(s0[i] == doctest::Approx(r0).epsilon(1e-12));
    CHECK(s0[i] / (n * h * std::sqrt(2 * M_PI)) == doctest::Approx(oracle::kde(y, h, s.sorted()[i])).epsilon(1e-12));
    CHECK(m.s0[i] == doctest::Approx(r0).epsilon(1e-12));
    CHECK(m.s2[i] == doctest::Approx(r2).epsilon(1e-11));
    CHECK(m.s4[i] == doctest::Approx(r4).epsilon(1e-11));
    CHECK(m.s6[i] == doctest::Approx(r6).epsilon(1e-11));
  }
}

TEST_CASE("series expansion agrees with direct sums")
{
  for (double h : { 0.05, 0.3, 2.0 }) {
    const auto y = oracle::lognormal_sample(21, 6000);
    const Sample s(y);
    const auto a = gauss_sums(s.sorted(), h, SumMethod::Direct);
    const auto b = gauss_sums(s.sorted(), h, SumMethod::Expansion);
    const auto ma = gauss_moments(s.sorted(), h, SumMethod::Direct);
    const auto mb = gauss_moments(s.sorted(), h, SumMethod::Expansion);
    double worst = 0, worst_m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst = std::max(worst, std::abs(a[i] - b[i]) / a[i]);
      // moments can vanish locally; compare against the scale of s0
      worst_m = std::max({ worst_m, std::abs(ma.s2[i] - mb.s2[i]) / ma.s0[i], std::abs(ma.s4[i] - mb.s4[i]) / ma.s0[i],
                           std::abs(ma.s6[i] - mb.s6[i]) / ma.s0[i] });
    }
    CAPTURE(h);
    CHECK(worst < 1e-12);
    CHECK(worst_m < 1e-9);
  }
}

TEST_CASE("auto switches to the expansion only for large samples")
{
  const auto y = oracle::lognormal_sample(2, 12000);
  const Sample s(y);
  const auto a = gauss_sums(s.sorted(), 0.2);
  const auto d = gauss_sums(s.sorted(), 0.2, SumMethod::Direct);
  for (std::size_t i = 0; i < a.size(); i += 101)
    CHECK(a[i] == doctest::Approx(d[i]).epsilon(1e-12));
}
