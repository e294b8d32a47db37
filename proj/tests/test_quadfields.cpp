#include "doctest.h"
#include "qm/quadfields.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

using namespace qm;

TEST_CASE("discriminant enumeration") {
  CHECK(enumerate_discs(25, parse_stuple("inf=C;3=rm")) ==
        std::vector<i64>{-3, -15, -24});
  CHECK(enumerate_discs(10, parse_stuple("inf=R")) == std::vector<i64>{5, 8});
  CHECK(enumerate_discs(3, parse_stuple("inf=C")) == std::vector<i64>{-3});
  CHECK(enumerate_discs(24, parse_stuple("inf=C;2=rm:d2")) ==
        std::vector<i64>{-4, -20});
  CHECK(enumerate_discs(24, parse_stuple("inf=C;2=rm:d3")) ==
        std::vector<i64>{-8, -24});
  CHECK(enumerate_discs(30, parse_stuple("inf=R;3=rm;5=in")) ==
        std::vector<i64>{12});
  // ordered by |d|, all matching, none missing
  auto v = enumerate_discs(500, parse_stuple("inf=C;5=rm-;7=sp"));
  CHECK(!v.empty());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(is_fundamental(v[i]));
    CHECK(matches(v[i], parse_stuple("inf=C;5=rm-;7=sp")));
    if (i) CHECK(std::abs(v[i - 1]) < std::abs(v[i]));
  }
}

TEST_CASE("imaginary class numbers by reduced forms") {
  struct {
    i64 d, h;
  } spots[] = {{-3, 1},  {-4, 1},  {-7, 1},  {-8, 1},  {-15, 2},
               {-20, 2}, {-23, 3}, {-24, 2}, {-39, 4}, {-47, 5},
               {-71, 7}, {-84, 4}, {-163, 1}};
  for (auto s : spots) CHECK(class_number_imag_forms(s.d) == s.h);
}

TEST_CASE("imaginary class number sieve agrees with per-discriminant forms") {
  auto sv = sieve_class_numbers_imag(200);
  CHECK(sv.X == 200);
  for (i64 d = -3; d >= -200; --d) {
    if (!is_fundamental(d)) {
      CHECK_FALSE(sv.fundamental[-d]);
      continue;
    }
    CHECK(sv.fundamental[-d]);
    CHECK(sv.get(d) == class_number_imag_forms(d));
  }
  CHECK_THROWS_AS(sv.get(5), std::invalid_argument);
  CHECK_THROWS_AS(sv.get(-300), std::invalid_argument);
  CHECK_THROWS_AS(sv.get(-12), std::invalid_argument);
}

TEST_CASE("imaginary class number from the character sum") {
  CHECK(class_number_imag_analytic(-3) == 1);
  CHECK(class_number_imag_analytic(-4) == 1);
  CHECK(class_number_imag_analytic(-23) == 3);
  CHECK(class_number_imag_analytic(-163) == 1);
  for (i64 d = -3; d >= -500; --d) {
    if (!is_fundamental(d)) continue;
    CHECK(class_number_imag_analytic(d) == class_number_imag_forms(d));
  }
}

TEST_CASE("regulators from the continued fraction") {
  struct {
    i64 d;
    double R;
  } spots[] = {
      {5, 0.481211825059603447497758913424368423135184334385660519661018},
      {8, 0.881373587019543025232609324979792309028160328261635410753296},
      {12, 1.31695789692481670862504634730796844402698197146751647976847},
      {13, 1.19476321728710930411193082851909052353616207515300542927068},
      {40, 1.81844645923206682348369896356070899378625394276812161745174},
      {60, 2.06343706889556054672728117262013187145659144988339249983603},
      {61, 3.66421846088643752592584648846429273478387712410404090314775},
      {136, 4.24829109791438869530158077845146569372943209209750290613499},
      {57, 5.7104160527631525225},
      {332, 5.0998292455006193355},
  };
  for (auto s : spots) CHECK(std::abs(regulator_real(s.d) - s.R) < 1e-10);
  CHECK_THROWS_AS(regulator_real(-3), std::invalid_argument);
  CHECK_THROWS_AS(regulator_real(20), std::invalid_argument);
}

TEST_CASE("fundamental units") {
  struct {
    i64 d, x, y;
    int n;
  } spots[] = {{5, 1, 1, -1},   {8, 2, 1, -1},   {12, 4, 1, 1},
               {13, 3, 1, -1},  {40, 6, 1, -1},  {60, 8, 1, 1},
               {61, 39, 5, -1}, {136, 70, 6, 1}};
  for (auto s : spots) {
    auto u = fundamental_unit_exact(s.d);
    CHECK(u.x == s.x);
    CHECK(u.y == s.y);
    CHECK(u.norm == s.n);
  }
  using boost::multiprecision::cpp_int;
  using Real = boost::multiprecision::cpp_bin_float_50;
  for (i64 d = 5; d <= 500; ++d) {
    if (!is_fundamental(d)) continue;
    auto u = fundamental_unit_exact(d);
    cpp_int lhs = u.x * u.x - cpp_int(d) * u.y * u.y;
    CHECK(lhs == 4 * u.norm);
    CHECK((u.norm == 1 || u.norm == -1));
    Real eps = (Real(u.x) + Real(u.y) * sqrt(Real(d))) / 2;
    double lg = static_cast<double>(log(eps));
    CHECK(std::abs(lg - regulator_real(d)) < 1e-8);
  }
}

TEST_CASE("L(1, chi) character sums") {
  struct {
    i64 d;
    double L;
  } spots[] = {
      {-3, 0.604599788078072616864692752547385244094688749364246858523295},
      {-4, 0.785398163397448309615660845819875721049292349843776455243736},
      {-8, 1.11072073453959156175397024751517342465365542234392255577135},
      {-23, 1.96520205410785916590276700512233641512967597866562035907344},
      {5, 0.430408940964004038889433232950605425424570682540289654757006},
      {8, 0.623225240140230513394020080250568002650695312346567252898715},
      {13, 0.662735391071845589713696515476850261758947443013789622680652},
      {40, 1.15008652284837089432218264422842213178839329164925176830048},
  };
  for (auto s : spots) {
    double err = 0;
    double L = l_one_chi(s.d, 1e-11, &err);
    CHECK(std::abs(L - s.L) < 2e-11);
    CHECK(err <= 1e-11);
  }
  // class number formula closes the loop for imaginary d
  const double pi = 3.14159265358979323846;
  struct {
    i64 d, w, h;
  } cnf[] = {{-3, 6, 1}, {-4, 4, 1}, {-23, 2, 3}};
  for (auto c : cnf) {
    double L = l_one_chi(c.d, 1e-12);
    CHECK(std::abs(c.w * std::sqrt(double(-c.d)) * L / (2 * pi) - c.h) < 1e-9);
  }
}

TEST_CASE("class number and regulator records") {
  auto r = hR(-20);
  CHECK(r.h == 2);
  CHECK(r.R == 1.0);
  CHECK(hR(-3).h == 1);
  CHECK(hR(-163).h == 1);
  auto r5 = hR(5);
  CHECK(r5.h == 1);
  CHECK(std::abs(r5.R - 0.481211825059603447) < 1e-10);
  CHECK(hR(40).h == 2);
  CHECK(std::abs(hR(40).R - 1.81844645923206682) < 1e-10);
  CHECK(hR(60).h == 2);
  CHECK(hR(61).h == 1);
  CHECK(hR(13).h == 1);
  CHECK(hR(136).h == 2);
  CHECK(hR(12).h == 1);
  CHECK(hR(57).h == 1);
  CHECK(std::abs(hR(57).R - 5.7104160527631525) < 1e-9);
  CHECK(hR(332).h == 1);
  CHECK_THROWS_AS(hR(9), std::invalid_argument);
  CHECK_THROWS_AS(hR(1), std::invalid_argument);
}

TEST_CASE("record cache round trip") {
  const std::string path = "hr_cache_test.tmp";
  std::remove(path.c_str());
  {
    HRCache c(path);
    CHECK(c.size() == 0);
    auto a = hR(5, &c);
    auto b = hR(-20, &c);
    auto e = hR(61, &c);
    CHECK(c.size() == 3);
    // hit path returns the stored record bit for bit
    auto a2 = hR(5, &c);
    CHECK(a2.h == a.h);
    CHECK(a2.R == a.R);
    c.flush();
  }
  {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::string line;
    std::getline(f, line);
    CHECK(line == "#quadmoment-hr-v1");
    std::vector<i64> order;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string dtok, htok, rtok;
      std::getline(ss, dtok, ',');
      std::getline(ss, htok, ',');
      std::getline(ss, rtok, ',');
      order.push_back(std::stoll(dtok));
      CHECK(!htok.empty());
      CHECK(!rtok.empty());
    }
    CHECK(order == std::vector<i64>{5, -20, 61});
  }
  {
    HRCache c(path);
    CHECK(c.size() == 3);
    FieldRecord rec;
    REQUIRE(c.get(5, &rec));
    CHECK(rec.h == 1);
    CHECK(std::abs(rec.R - 0.481211825059603447) < 1e-10);
    REQUIRE(c.get(-20, &rec));
    CHECK(rec.h == 2);
    CHECK_FALSE(c.get(40, &rec));
    REQUIRE(c.get(61, &rec));
    CHECK(std::abs(rec.R - 3.66421846088643753) < 1e-10);
  }
  std::remove(path.c_str());
}
