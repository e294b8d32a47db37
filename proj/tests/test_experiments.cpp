#include "doctest.h"
#include "qm/experiments.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

using namespace qm;

namespace {

bool close_rel(const Real& a, const Real& b, double tol) {
  using boost::multiprecision::abs;
  return abs(a - b) <= Real(tol) * abs(b);
}

RunOptions fast_opt() {
  RunOptions o;
  o.prime_bound = 10000;
  return o;
}

}  // namespace

TEST_CASE("mean square over an imaginary family") {
  auto rep = mean_square_run(parse_stuple("inf=C;3=rm"), {50, 100, 1000},
                             fast_opt());
  CHECK(rep.kind == "mean");
  CHECK(rep.stuple == "inf=C;3=rm");
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].cutoff == 50);
  CHECK(rep.rows[0].field_count == 4);
  CHECK(rep.rows[0].empirical == Real(25) / Real(2500));
  CHECK(rep.rows[1].field_count == 7);
  CHECK(rep.rows[1].empirical == Real(81) / Real(10000));
  CHECK(rep.rows[2].field_count == 75);
  CHECK(rep.rows[2].empirical == Real(8845) / Real(1000000));
  CHECK(close_rel(rep.prediction.value,
                  Real("0.00890739339544218906139543371348694900138847085372"),
                  1e-40));
  CHECK(rep.rows[2].rel_err < 0.01);
  CHECK(rep.rows[2].prediction == rep.prediction.value);
}

TEST_CASE("mean square over a real family") {
  RunOptions opt = fast_opt();
  const std::string path = "hr_exp_cache.tmp";
  std::remove(path.c_str());
  HRCache cache(path);
  opt.cache = &cache;
  auto rep = mean_square_run(parse_stuple("inf=R;3=rm;5=in"), {2000}, opt);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].field_count == 64);
  CHECK(close_rel(rep.rows[0].empirical,
                  Real("0.005494670118139620119927611"), 1e-9));
  CHECK(close_rel(rep.prediction.value,
                  Real("0.00574440989662117844175735839742605562343225159352"),
                  1e-40));
  CHECK(rep.rows[0].rel_err < 0.06);
  CHECK(cache.size() == 64);
  // second run hits the cache and reproduces the sum exactly
  auto rep2 = mean_square_run(parse_stuple("inf=R;3=rm;5=in"), {2000}, opt);
  CHECK(rep2.rows[0].empirical == rep.rows[0].empirical);
  std::remove(path.c_str());
}

TEST_CASE("mean square hypothesis and guards") {
  CHECK_THROWS_AS(mean_square_run(parse_stuple("inf=C"), {100}, fast_opt()),
                  std::invalid_argument);
  RunOptions opt = fast_opt();
  opt.conjectural = true;
  auto rep = mean_square_run(parse_stuple("inf=C"), {100}, opt);
  CHECK(rep.prediction.conjectural);
  CHECK(rep.rows[0].field_count > 0);
  CHECK_THROWS_AS(
      mean_square_run(parse_stuple("inf=C;3=rm"), {20000000}, fast_opt()),
      std::invalid_argument);
  CHECK_THROWS_AS(
      mean_square_run(parse_stuple("inf=R;3=rm;5=in"), {150000}, fast_opt()),
      std::invalid_argument);
}

TEST_CASE("correlation run") {
  auto s = parse_stuple("inf=C;5=rm-;7=sp");
  auto rep = correlation_run(s, 5, {1000, 5000}, fast_opt());
  CHECK(rep.kind == "correlation");
  CHECK(rep.m == 5);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].field_count == 11);
  Real want0 = Real(322) / sqrt(Real(2588) * Real(123));
  CHECK(close_rel(rep.rows[0].empirical, want0, 1e-40));
  CHECK(rep.rows[1].field_count == 56);
  Real want1 = Real(7328) / sqrt(Real(45224) * Real(4158));
  CHECK(close_rel(rep.rows[1].empirical, want1, 1e-40));
  CHECK(close_rel(rep.prediction.value,
                  Real("0.548765511878261873870485356343030882714157573509"),
                  1e-40));
  CHECK(rep.rows[1].rel_err < 0.05);
}

TEST_CASE("inner product run") {
  auto s = parse_stuple("inf=C;5=rm-;7=sp");
  auto rep = inner_product_run(s, 5, {1000}, fast_opt());
  CHECK(rep.kind == "inner");
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].field_count == 11);
  CHECK(rep.rows[0].empirical == Real(322) / Real(1000000));
  CHECK(close_rel(rep.prediction.value,
                  Real("0.000302814986133169830735249599496402758451302130233"),
                  1e-38));
}

TEST_CASE("twisted runs validate their hypotheses") {
  CHECK_THROWS_AS(correlation_run(parse_stuple("inf=C;3=rm"), 5, {100}, fast_opt()),
                  std::invalid_argument);
  CHECK_THROWS_AS(correlation_run(parse_stuple("inf=C;5=rm-;7=sp"), 8, {100},
                                  fast_opt()),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      correlation_run(parse_stuple("inf=C;2=rm:d2;5=rm-;7=sp"), 5, {100},
                      fast_opt()),
      std::invalid_argument);
  CHECK_THROWS_AS(inner_product_run(parse_stuple("inf=C;3=rm"), 5, {100},
                                    fast_opt()),
                  std::invalid_argument);
}

TEST_CASE("discriminant twist law") {
  auto s = parse_stuple("inf=C;5=rm-;7=sp");
  auto rep = verify_disc_twist(s, 5, 10000, fast_opt());
  CHECK(rep.m == 5);
  CHECK(rep.checked > 100);
  CHECK(rep.failures == 0);
  REQUIRE(!rep.sample.empty());
  for (auto& row : rep.sample) {
    CHECK(row.ok);
    CHECK(std::abs(row.dstar) * 5 == std::abs(row.d));
    CHECK(row.expected_abs == std::abs(row.d) / 5);
  }
  CHECK_THROWS_AS(verify_disc_twist(s, 8, 100, fast_opt()),
                  std::invalid_argument);
  // the twisting field itself is skipped, not a failure
  auto rep2 = verify_disc_twist(parse_stuple("inf=R;5=rm+;3=in"), 5, 10,
                                fast_opt());
  CHECK(rep2.checked == 0);
  CHECK(rep2.failures == 0);
}

TEST_CASE("report CSV shape") {
  auto rep = mean_square_run(parse_stuple("inf=C;3=rm"), {50, 100}, fast_opt());
  std::istringstream csv(rep.csv());
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "X,count,empirical,prediction,rel_err");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.find(',') != std::string::npos);
  }
  CHECK(rows == 2);

  auto tw = verify_disc_twist(parse_stuple("inf=C;5=rm-;7=sp"), 5, 1000,
                              fast_opt());
  std::istringstream tcsv(tw.csv());
  REQUIRE(std::getline(tcsv, line));
  CHECK(line.substr(0, 2) == "d,");
}
