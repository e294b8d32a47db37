#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "qm/localdata.hpp"

namespace qm {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using Real = boost::multiprecision::cpp_bin_float_50;

Real pi_real();
Real zeta2();  // zeta(2) = pi^2/6

struct BaseFieldConstants {
  int r1 = 1, r2 = 0;
  int e_k = 2;
  i64 Delta_k = 1;
  Rat C_k = 1;
  Real zeta2;
  Real res_zeta = 1;
  static BaseFieldConstants rationals();
};

// Truncated Euler product with a certified tail bound.  The value factors
// as rational_part * pi^pi_pow * sqrt(sqrt_disc) * aux; the rational part
// is held as an unreduced numerator/denominator pair of big integers and
// aux carries any non-algebraic factor (an L-value), 1 otherwise.
struct ProductEstimate {
  Real value;
  Int rat_num = 1, rat_den = 1;
  int pi_pow = 0;
  i64 sqrt_disc = 1;
  Real aux = 1;
  std::string aux_label;
  i64 prime_bound = 0;
  double tail_bound_log = 0.0;
  std::string name;
  bool conjectural = false;

  Rat rational_part() const;
  std::string to_kv() const;    // line oriented key=value block
  std::string to_json() const;  // structured document
};

Rat e_v(i64 q, const QuadClass& c);
Rat E_v(i64 q);

// e_infty as (rational, power of pi): RR -> 1/4, CC -> (1/2) pi^-1.
std::pair<Rat, int> e_infty_parts(ArchKind arch);
Real e_infty(const STuple& s);

Rat R_k(const BaseFieldConstants& b);

Rat f_v(i64 q, const QuadClass& c, SplitType t, bool is_ktilde_local);
Rat F_v(i64 q, SplitType t);
Rat correlation_factor(i64 q);

Rat delta_LS(i64 m, const STuple& s);

// L(2, chi_m) via Hurwitz zeta values at a/|m| evaluated by Euler-Maclaurin,
// with a certified remainder bound written into *abs_err if given.
Real l2_chi(i64 m, double target_abs_err, double* abs_err = nullptr);

ProductEstimate predicted_mean(const STuple& s, i64 prime_bound,
                               bool allow_conjectural = false);
ProductEstimate predicted_correlation(i64 m, const STuple& s, i64 prime_bound);
ProductEstimate predicted_mean_dual(i64 m, const STuple& s, i64 prime_bound);
ProductEstimate predicted_inner(i64 m, const STuple& s, i64 prime_bound);

// Primes up to and including n (sieved once and cached internally).
std::vector<i64> primes_upto(i64 n);

}  // namespace qm
