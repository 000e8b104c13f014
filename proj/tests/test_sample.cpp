#include "oracles.hpp"

#include "rsc/error.hpp"
#include "rsc/sample.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

using namespace rsc;
namespace fs = std::filesystem;

namespace {

fs::path
scratch_file(const std::string& name, const std::string& text)
{
  const auto dir = fs::temp_directory_path() / "rsc_test_sample";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

ErrorCode
code_of(auto&& fn)
{
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("sample basics")
{
  const Sample s({ 3.0, 1.0, 2.0, 1.0 });
  CHECK(s.size() == 4);
  CHECK(s.mean() == doctest::Approx(1.75));
  CHECK(s.variance() == doctest::Approx(oracle::variance({ 3, 1, 2, 1 })));
  const auto idx = s.sort_index();
  CHECK(idx[0] == 1); // stable: the first 1.0 stays first
  CHECK(idx[1] == 3);
  CHECK(idx[2] == 2);
  CHECK(idx[3] == 0);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(s.sorted()[s.rank_of(j)] == s.values()[j]);

  CHECK(code_of([] { Sample({ 5.0 }); }) == ErrorCode::TooFewObservations);
  CHECK(code_of([] { Sample({ 1.0, NAN }); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Sample({ 1.0, INFINITY }); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cached moments match a recomputation")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto y = oracle::lognormal_sample(seed, 300);
    const Sample s(y);
    CHECK(std::abs(s.mean() - oracle::mean(y)) <= 1e-12 * std::abs(oracle::mean(y)));
    CHECK(std::abs(s.variance() - oracle::variance(y)) <= 1e-12 * oracle::variance(y));
    for (std::size_t k = 1; k < s.size(); ++k)
      REQUIRE(s.sorted()[k - 1] <= s.sorted()[k]);
  }
}

TEST_CASE("leave-one-out view")
{
  const Sample s({ 1.0, 2.0, 3.0 });
  const auto v2 = s.leave_one_out(2);
  CHECK(v2.size() == 2);
  CHECK(v2[0] == 1.0);
  CHECK(v2[1] == 2.0);
  CHECK(v2.mean() == doctest::Approx(1.5));
  CHECK(s.leave_one_out(0).mean() == doctest::Approx((3 * 2.0 - 1) / 2));
  CHECK(code_of([&] { (void)s.leave_one_out(3); }) == ErrorCode::IndexOutOfRange);

  const auto y = oracle::lognormal_sample(3, 101);
  const Sample big(y);
  const double n = static_cast<double>(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto v = big.leave_one_out(j);
    const auto expect = oracle::drop(y, j);
    std::vector<double> seen(v.begin(), v.end());
    REQUIRE(seen == expect);
    const double closed = (n * big.mean() - y[j]) / (n - 1);
    REQUIRE(std::abs(v.mean() - closed) <= 1e-12 * std::abs(closed));
    std::vector<double> sorted;
    v.copy_sorted(sorted);
    auto ref = expect;
    std::sort(ref.begin(), ref.end());
    REQUIRE(sorted == ref);
    for (std::size_t k = 0; k < ref.size(); ++k)
      REQUIRE(v.sorted_at(k) == ref[k]);
  }
}

TEST_CASE("csv ingestion")
{
  SUBCASE("three rows")
  {
    const auto p = scratch_file("three.csv", "wage,union,age\n10.5,1,30\n12,0,41\n9.25,1,22\n");
    const auto d = load_csv(p, "wage", { "union" });
    CHECK(d.outcome.size() == 3);
    CHECK(d.covariates.cols() == 1);
    CHECK(d.outcome.values()[2] == 9.25);
    CHECK(d.covariates(1, 0) == 0.0);
    CHECK(d.dropped_rows == 0);
  }
  SUBCASE("missing cell drops the row")
  {
    const auto p = scratch_file("na.csv", "wage,union\n10,1\nNA,0\n11,1\n13,\n");
    const auto d = load_csv(p, "wage", { "union" });
    CHECK(d.outcome.size() == 2);
    CHECK(d.dropped_rows == 2);
  }
  SUBCASE("quotes, CRLF and BOM")
  {
    const auto p = scratch_file("q.csv", "\xEF\xBB\xBF\"wage\",\"note, with comma\",x\r\n1,\"a \"\"q\"\"\",2\r\n3,b,4\r\n");
    const auto d = load_csv(p, "wage", { "x" });
    CHECK(d.outcome.size() == 2);
    CHECK(d.covariates(1, 0) == 4.0);
  }
  SUBCASE("errors")
  {
    const auto p = scratch_file("e.csv", "a,b\n1,2\n3,4\n");
    CHECK(code_of([&] { load_csv(p, "c", {}); }) == ErrorCode::MissingColumn);
    CHECK(code_of([&] { load_csv(p, "a", { "zz" }); }) == ErrorCode::MissingColumn);
    const auto few = scratch_file("few.csv", "a,b\n1,2\nx,4\n");
    CHECK(code_of([&] { load_csv(few, "a", { "b" }); }) == ErrorCode::EmptyAfterFiltering);
    const auto bad = scratch_file("bad.csv", "a,b\n\"1,2\n3,4\n");
    CHECK(code_of([&] { load_csv(bad, "a", { "b" }); }) == ErrorCode::UnparseableFile);
    CHECK(code_of([&] { load_csv("/nonexistent/file.csv", "a", {}); }) == ErrorCode::UnparseableFile);
  }
  SUBCASE("round trip")
  {
    const auto d = dgp_draw({}, 50, 5);
    const auto p = fs::temp_directory_path() / "rsc_test_sample" / "rt.csv";
    write_csv(d, p);
    const auto back = load_csv(p, "y", { "x" });
    REQUIRE(back.outcome.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(back.outcome.values()[i] == d.outcome.values()[i]);
      CHECK(back.covariates(static_cast<Eigen::Index>(i), 0) == d.covariates(static_cast<Eigen::Index>(i), 0));
    }
  }
}

TEST_CASE("data generating processes")
{
  SUBCASE("location-scale moments")
  {
    const auto y = dgp_outcomes({ DgpModel::Kind::LocationScale, 0.0 }, 1'000'000, 11);
    // E[Y] = 20.5; Var(Y) = Var(X) + E[(1+X)^2] = 1/12 + 7/3
    CHECK(std::abs(oracle::mean(y) - 20.5) < 0.01);
    CHECK(std::abs(oracle::variance(y) / (29.0 / 12.0) - 1.0) < 0.01);
  }
  SUBCASE("bimodal mean")
  {
    const auto y = dgp_outcomes({ DgpModel::Kind::LocationBimodal, 0.0 }, 1'000'000, 12);
    CHECK(std::abs(oracle::mean(y) - 20.5) < 0.01);
  }
  SUBCASE("determinism and common random numbers")
  {
    const auto a = dgp_draw({ DgpModel::Kind::LocationScale, 0.0 }, 1000, 3, 9);
    const auto b = dgp_draw({ DgpModel::Kind::LocationScale, 0.0 }, 1000, 3, 9);
    const auto c = dgp_draw({ DgpModel::Kind::LocationScale, 0.25 }, 1000, 3, 9);
    const auto bm0 = dgp_draw({ DgpModel::Kind::LocationBimodal, 0.0 }, 1000, 3, 9);
    const auto bm1 = dgp_draw({ DgpModel::Kind::LocationBimodal, 0.25 }, 1000, 3, 9);
    for (std::size_t i = 0; i < 1000; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      REQUIRE(a.outcome.values()[i] == b.outcome.values()[i]);
      const double x = a.covariates(r, 0);
      REQUIRE(c.covariates(r, 0) == doctest::Approx(x + 0.25));
      // Y = 20 + X' + (1 + X') U: recover U from the unshifted draw
      const double u = (a.outcome.values()[i] - 20.0 - x) / (1.0 + x);
      const double xs = x + 0.25;
      REQUIRE(c.outcome.values()[i] == doctest::Approx(20.0 + xs + (1.0 + xs) * u).epsilon(1e-12));
      // bimodal with the same X
      REQUIRE(bm0.covariates(r, 0) == x);
      // (W - mode) / (2 - X') is the same normal draw over 5 at both shifts
      const double w0 = bm0.outcome.values()[i] - 20.0 - x;
      const double w1 = bm1.outcome.values()[i] - 20.0 - xs;
      auto tied = [&](double mode) {
        return std::abs((w1 - mode) * (2.0 - x) - (w0 - mode) * (2.0 - xs)) < 1e-9;
      };
      REQUIRE((tied(-0.8) || tied(0.8)));
    }
    const auto d = dgp_draw({}, 1000, 3, 10);
    CHECK(d.outcome.values()[0] != a.outcome.values()[0]);
  }
}
