#include "qm/density.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <boost/math/constants/constants.hpp>

#include "json.hpp"

namespace qm {

namespace {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 17);
  return std::string(buf, p);
}

// Unreduced big-integer product accumulator; one float division at the end.
struct Accum {
  Int num = 1, den = 1;
  void mul(const Rat& r) {
    num *= numerator(r);
    den *= denominator(r);
  }
  void muli(i64 k) { num *= k; }
};

void finalize(ProductEstimate& pe) {
  Real v = Real(pe.rat_num) / Real(pe.rat_den);
  if (pe.pi_pow > 0)
    v *= boost::multiprecision::pow(pi_real(), pe.pi_pow);
  else if (pe.pi_pow < 0)
    v /= boost::multiprecision::pow(pi_real(), -pe.pi_pow);
  if (pe.sqrt_disc != 1) v *= sqrt(Real(pe.sqrt_disc));
  v *= pe.aux;
  pe.value = v;
}

int validated_delta(i64 q, const QuadClass& c) {
  if (c.kind != Kind::Ramified) return 0;
  if (q == 2 ? (c.delta != 2 && c.delta != 3) : c.delta != 1)
    throw std::invalid_argument("ramification exponent does not fit the prime");
  return c.delta;
}

i64 class_multiplicity(i64 p, const QuadClass& c) {
  if (c.kind != Kind::Ramified || c.tag) return 1;
  return count_ramified_classes(p, c.delta, p == 2 ? 1 : 0);
}

void validate_prime_bound(i64 B) {
  if (B < 10) throw std::invalid_argument("prime bound must be at least 10");
}

}  // namespace

Real pi_real() { return boost::math::constants::pi<Real>(); }

Real zeta2() {
  Real p = pi_real();
  return p * p / 6;
}

BaseFieldConstants BaseFieldConstants::rationals() {
  BaseFieldConstants b;
  b.zeta2 = qm::zeta2();
  return b;
}

std::vector<i64> primes_upto(i64 n) {
  static i64 limit = 0;
  static std::vector<i64> primes;
  if (n > limit) {
    i64 newlim = std::max<i64>(n, std::max<i64>(2 * limit, i64(1) << 16));
    std::vector<char> comp(newlim + 1, 0);
    primes.clear();
    for (i64 i = 2; i <= newlim; ++i) {
      if (comp[i]) continue;
      primes.push_back(i);
      for (i64 j = i * i; j <= newlim; j += i) comp[j] = 1;
    }
    limit = newlim;
  }
  auto it = std::upper_bound(primes.begin(), primes.end(), n);
  return std::vector<i64>(primes.begin(), it);
}

Rat e_v(i64 q, const QuadClass& c) {
  Rat qi(1, q);
  switch (c.kind) {
    case Kind::Split:
      return Rat(1, 2) * (1 + qi) * (1 - qi * qi);
    case Kind::Inert:
      return Rat(1, 2) * (1 - qi) * (1 - qi) * (1 - qi);
    case Kind::Ramified: {
      int delta = validated_delta(q, c);
      Rat qd = 1;
      for (int i = 0; i < delta; ++i) qd *= qi;
      Rat t = 1 - qi * qi;
      return Rat(1, 2) * qd * (1 - qi) * t * t;
    }
  }
  throw std::logic_error("unreachable");
}

Rat E_v(i64 q) {
  Int Q = q, q3 = Q * Q * Q, q6 = q3 * q3;
  return Rat(q6 - 3 * q3 + 2 * Q * Q + Q - 1, q6);
}

std::pair<Rat, int> e_infty_parts(ArchKind arch) {
  if (arch == ArchKind::RR) return {Rat(1, 4), 0};
  return {Rat(1, 2), -1};
}

Real e_infty(const STuple& s) {
  auto [r, p] = e_infty_parts(s.arch);
  Real v = r.convert_to<Real>();
  if (p > 0)
    v *= boost::multiprecision::pow(pi_real(), p);
  else if (p < 0)
    v /= boost::multiprecision::pow(pi_real(), -p);
  return v;
}

Rat R_k(const BaseFieldConstants& b) {
  Rat r = Rat(b.e_k) * b.e_k * b.C_k * b.C_k * b.C_k;
  for (int i = 0; i < b.r1 + b.r2 + 1; ++i) r /= 2;
  return r;
}

Rat f_v(i64 q, const QuadClass& c, SplitType t, bool is_ktilde_local) {
  Rat qi(1, q);
  switch (t) {
    case SplitType::sp:
      return e_v(q, c);
    case SplitType::in: {
      if (c.kind == Kind::Ramified) {
        int delta = validated_delta(q, c);
        Rat qd = 1;
        for (int i = 0; i < delta; ++i) qd *= qi;
        Rat q4 = qi * qi * qi * qi;
        return Rat(1, 2) * qd * (1 - qi) * (1 - q4);
      }
      return Rat(1, 2) * (1 - qi) * (1 + qi * qi);
    }
    case SplitType::rm: {
      if (q == 2)
        throw std::invalid_argument(
            "the twisting field never ramifies at a dyadic place here");
      switch (c.kind) {
        case Kind::Split:
          return Rat(1, 2) * (1 - qi * qi);
        case Kind::Inert:
          return Rat(1, 2) * (1 - qi) * (1 - qi);
        case Kind::Ramified: {
          validated_delta(q, c);
          Rat q2 = qi * qi;
          return is_ktilde_local ? Rat(1, 2) * q2 * (1 - q2)
                                 : Rat(1, 2) * q2 * (1 - qi) * (1 - qi);
        }
      }
      throw std::logic_error("unreachable");
    }
  }
  throw std::logic_error("unreachable");
}

Rat F_v(i64 q, SplitType t) {
  switch (t) {
    case SplitType::sp:
      return E_v(q);
    case SplitType::in: {
      Int Q = q, q3 = Q * Q * Q, q6 = q3 * q3;
      return Rat(q6 - q3 - Q + 1, q6);
    }
    case SplitType::rm:
      throw std::invalid_argument("no unconditioned factor at a place of k~");
  }
  throw std::logic_error("unreachable");
}

Rat correlation_factor(i64 q) {
  Int Q = q, q2 = Q * Q, q3 = q2 * Q, q4 = q3 * Q, q5 = q4 * Q;
  return Rat(q5 + q4 - q3 - 2 * q2 + 1, q5 + q4 + q3 - 2 * q2 + 1);
}

Rat delta_LS(i64 m, const STuple& s) {
  if (m == 1 || !is_fundamental(m) || ((m % 4) + 4) % 4 != 1)
    throw std::invalid_argument(
        "twisting discriminant must be fundamental, 1 mod 4 and not 1");
  Rat r = 1;
  i64 n = m < 0 ? -m : m;
  for (i64 p = 3; n > 1; p += 2) {
    if (p * p > n) p = n;
    if (n % p) continue;
    while (n % p == 0) n /= p;
    auto it = s.finite.find(p);
    if (it == s.finite.end())
      throw std::invalid_argument(
          "every prime dividing the twisting discriminant needs an entry");
    if (it->second.kind == Kind::Ramified)
      r /= p;
    else
      r *= p;
  }
  return r;
}

namespace {

// Hurwitz zeta(2, q) for 0 < q <= 1: truncated series plus the trigamma
// asymptotic expansion at q + K.  With K = 64 the first omitted Bernoulli
// term is |B_32|/510 * 64^-33 < 8e-50.
Real hurwitz2(const Real& q) {
  constexpr int K = 64;
  Real s = 0;
  for (int n = 0; n < K; ++n) {
    Real t = q + n;
    s += 1 / (t * t);
  }
  Real x = q + K;
  Real xi = 1 / x;
  Real tail = xi * (1 + xi / 2);
  static const std::pair<long long, long long> bern[] = {
      {1, 6},
      {-1, 30},
      {1, 42},
      {-1, 30},
      {5, 66},
      {-691, 2730},
      {7, 6},
      {-3617, 510},
      {43867, 798},
      {-174611, 330},
      {854513, 138},
      {-236364091, 2730},
      {8553103, 6},
      {-23749461029LL, 870},
      {8615841276005LL, 14322},
  };
  Real x2 = xi * xi;
  Real pw = xi * x2;
  for (auto [bn, bd] : bern) {
    tail += Real(bn) / bd * pw;
    pw *= x2;
  }
  return s + tail;
}

}  // namespace

Real l2_chi(i64 m, double target_abs_err, double* abs_err) {
  if (m == 1 || !is_fundamental(m))
    throw std::invalid_argument(
        "character modulus must be a fundamental discriminant other than 1");
  const i64 M = m < 0 ? -m : m;
  Real sum = 0;
  for (i64 a = 1; a < M; ++a) {
    int chi = kronecker(m, a);
    if (!chi) continue;
    Real h = hurwitz2(Real(a) / M);
    if (chi == 1)
      sum += h;
    else
      sum -= h;
  }
  Real L = sum / (Real(M) * M);
  // asymptotic remainder, plus a coarse rounding allowance per term
  double bound = 8e-50 + double(M) * 64 * 3e-49 + 1e-48;
  if (bound > target_abs_err)
    throw std::invalid_argument("requested L-value accuracy beyond precision");
  if (abs_err) *abs_err = bound;
  return L;
}

Rat ProductEstimate::rational_part() const { return Rat(rat_num, rat_den); }

std::string ProductEstimate::to_kv() const {
  std::string out;
  out += "name=" + name + "\n";
  out += "rational=" + rat_num.str() + "/" + rat_den.str() + "\n";
  out += "pi_pow=" + std::to_string(pi_pow) + "\n";
  out += "sqrt_disc=" + std::to_string(sqrt_disc) + "\n";
  if (!aux_label.empty()) out += "aux=" + aux_label + ":" + aux.str(50) + "\n";
  out += "float=" + value.str(50) + "\n";
  out += "prime_bound=" + std::to_string(prime_bound) + "\n";
  out += "tail_bound_log=" + fmt_double(tail_bound_log) + "\n";
  out += std::string("conjectural=") + (conjectural ? "1" : "0") + "\n";
  return out;
}

std::string ProductEstimate::to_json() const {
  nlohmann::json j;
  j["constant_name"] = name;
  j["rational_part"] = rat_num.str() + "/" + rat_den.str();
  j["float_value"] = value.str(50);
  j["pi_pow"] = pi_pow;
  j["sqrt_disc"] = sqrt_disc;
  if (!aux_label.empty()) {
    j["aux_label"] = aux_label;
    j["aux_value"] = aux.str(50);
  }
  j["prime_bound"] = prime_bound;
  j["tail_bound_log"] = tail_bound_log;
  j["conjectural"] = conjectural;
  return j.dump(2);
}

ProductEstimate predicted_mean(const STuple& s, i64 prime_bound,
                               bool allow_conjectural) {
  validate_prime_bound(prime_bound);
  ProductEstimate pe;
  pe.name = "mean(" + format_stuple(s) + ")";
  pe.prime_bound = prime_bound;
  pe.conjectural = field_place_count(s) < 2;
  if (pe.conjectural && !allow_conjectural)
    throw std::invalid_argument(
        "mean prediction needs at least two field places");
  auto b = BaseFieldConstants::rationals();
  auto [einf, ppow] = e_infty_parts(s.arch);
  Accum a;
  a.mul(R_k(b));
  a.mul(Rat(1, 36));  // zeta(2)^2 = pi^4 / 36
  a.mul(einf * einf);
  pe.pi_pow = 4 + 2 * ppow;
  for (auto& [p, c] : s.finite) {
    a.muli(class_multiplicity(p, c));
    a.mul(e_v(p, c));
  }
  for (i64 p : primes_upto(prime_bound)) {
    if (s.finite.count(p)) continue;
    a.mul(E_v(p));
  }
  pe.rat_num = a.num;
  pe.rat_den = a.den;
  pe.tail_bound_log = 2.0 / (double(prime_bound) * double(prime_bound));
  finalize(pe);
  return pe;
}

ProductEstimate predicted_correlation(i64 m, const STuple& s, i64 prime_bound) {
  validate_prime_bound(prime_bound);
  for (auto& [p, c] : s.finite)
    if (p == 2 && c.kind == Kind::Ramified)
      throw std::invalid_argument(
          "correlation hypotheses exclude dyadic ramification");
  STuple t = twist_stuple(s, m);
  if (field_place_count(s) < 2 || field_place_count(t) < 2)
    throw std::invalid_argument(
        "correlation needs two field places on both sides");
  ProductEstimate pe;
  pe.name =
      "correlation(" + format_stuple(s) + " m=" + std::to_string(m) + ")";
  pe.prime_bound = prime_bound;
  Accum a;
  for (i64 p : primes_upto(prime_bound)) {
    if (s.finite.count(p)) continue;
    if (splitting_in_ktilde(p, m) != SplitType::in) continue;
    a.mul(correlation_factor(p));
  }
  pe.rat_num = a.num;
  pe.rat_den = a.den;
  pe.tail_bound_log = 2.01 / double(prime_bound);
  finalize(pe);
  return pe;
}

ProductEstimate predicted_mean_dual(i64 m, const STuple& s, i64 prime_bound) {
  STuple t = twist_stuple(s, m);
  ProductEstimate pe = predicted_mean(t, prime_bound, false);
  Rat dd = delta_LS(m, s);
  pe.name = "dual(" + format_stuple(s) + " m=" + std::to_string(m) + ")";
  pe.rat_num *= numerator(dd) * numerator(dd);
  pe.rat_den *= denominator(dd) * denominator(dd);
  finalize(pe);
  return pe;
}

ProductEstimate predicted_inner(i64 m, const STuple& s, i64 prime_bound) {
  validate_prime_bound(prime_bound);
  STuple t = twist_stuple(s, m);
  if (field_place_count(s) < 2 || field_place_count(t) < 2)
    throw std::invalid_argument(
        "inner product needs two field places on both sides");
  ProductEstimate pe;
  pe.name = "inner(" + format_stuple(s) + " m=" + std::to_string(m) + ")";
  pe.prime_bound = prime_bound;
  auto b = BaseFieldConstants::rationals();
  auto [e1, p1] = e_infty_parts(s.arch);
  auto [e2, p2] = e_infty_parts(t.arch);
  Accum a;
  a.mul(R_k(b));
  a.mul(Rat(1, 6));  // zeta(2) = pi^2 / 6
  a.mul(e1 * e2);
  pe.pi_pow = 2 + p1 + p2;
  pe.sqrt_disc = m < 0 ? -m : m;
  for (auto& [p, c] : s.finite) {
    SplitType tp = splitting_in_ktilde(p, m);
    if (tp == SplitType::rm) {
      // p | m; twist_stuple already rejected wildcard tags here
      int tag_m = kronecker(m / p, p);
      a.mul(f_v(p, c, tp, c.tag && *c.tag == tag_m));
    } else {
      a.muli(class_multiplicity(p, c));
      a.mul(f_v(p, c, tp, false));
    }
  }
  for (i64 p : primes_upto(prime_bound)) {
    if (s.finite.count(p)) continue;
    a.mul(F_v(p, splitting_in_ktilde(p, m)));
  }
  pe.rat_num = a.num;
  pe.rat_den = a.den;
  double l2err = 0;
  pe.aux = l2_chi(m, 1e-40, &l2err);
  pe.aux_label = "L(2,chi_" + std::to_string(m) + ")";
  pe.tail_bound_log =
      2.0 / (double(prime_bound) * double(prime_bound)) + 1e-39;
  finalize(pe);
  return pe;
}

}  // namespace qm
