#pragma once

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "qm/density.hpp"
#include "qm/localdata.hpp"

namespace qm {

enum class OrbitClass { ur_sp, ur_ur, ur_rm, rm_ur, rm_rm };

std::string orbit_class_name(OrbitClass c);

struct FiniteRing {
  i64 p = 0;
  int n = 1;
  i64 mod = 0;  // p^n
  FiniteRing() = default;
  FiniteRing(i64 p_, int n_);
};

// Element of a rank-4 algebra over Z/p^n.  Matrix variant: entries
// (a,b;c,d) as c[0..3].  Quaternion variant: coordinates over the basis
// {1, theta, rt, theta*rt} where rt^2 = p and rt*alpha = sigma(alpha)*rt.
struct Elt {
  std::array<i64, 4> c{0, 0, 0, 0};
  bool operator==(const Elt&) const = default;
};

struct MatrixAlgebra {
  FiniteRing R;
  explicit MatrixAlgebra(FiniteRing r) : R(r) {}
  Elt one() const { return Elt{{1, 0, 0, 1}}; }
  Elt add(const Elt& a, const Elt& b) const;
  Elt mul(const Elt& a, const Elt& b) const;
  Elt scale(i64 r, const Elt& a) const;
  i64 norm(const Elt& a) const;  // determinant
  bool is_unit(const Elt& a) const;
};

// Integral quaternion order of the ramified algebra mod p^n.  At odd p,
// theta^2 = u with u a fixed nonresidue and sigma(theta) = -theta; at
// p = 2, theta^2 = theta + 1 and sigma(theta) = 1 - theta.
struct QuaternionAlgebra {
  FiniteRing R;
  i64 u = 0;        // theta^2 at odd p; unused at p = 2
  bool dyadic = false;
  explicit QuaternionAlgebra(FiniteRing r);
  Elt one() const { return Elt{{1, 0, 0, 0}}; }
  Elt add(const Elt& a, const Elt& b) const;
  Elt mul(const Elt& a, const Elt& b) const;
  Elt scale(i64 r, const Elt& a) const;
  i64 norm(const Elt& a) const;
  bool is_unit(const Elt& a) const;
};

struct VPoint {
  Elt x1, x2;
};

// Coefficients of N(v1*x1 + v2*x2) as a binary quadratic form.
template <typename Alg>
std::array<i64, 3> binary_form(const VPoint& x, const Alg& A) {
  i64 a0 = A.norm(x.x1);
  i64 a2 = A.norm(x.x2);
  i64 a1 = A.norm(A.add(x.x1, x.x2)) - a0 - a2;
  i64 m = A.R.mod;
  return {((a0 % m) + m) % m, ((a1 % m) + m) % m, ((a2 % m) + m) % m};
}

template <typename Alg>
i64 rel_invariant(const VPoint& x, const Alg& A) {
  auto a = binary_form(x, A);
  i64 m = A.R.mod;
  i64 p = (a[1] * a[1] - 4 * a[0] * a[2]) % m;
  return (p + m) % m;
}

// Standard representative together with its exact relative invariant.
struct StdRep {
  VPoint x;
  i64 P_exact = 0;  // over Z, before reduction
  int delta = 0;
};
StdRep std_rep(i64 p, int n, OrbitClass cls);

boost::multiprecision::cpp_int group_order(i64 p, int n, bool ramified);

struct OrbitResult {
  std::uint64_t orbit_size = 0;
  std::uint64_t state_space = 0;  // p^(8n)
  bool escape_check_passed = true;
};

struct OrbitOptions {
  std::uint64_t mem_cap_bytes = 2ull << 30;
  int random_checks = 10000;
  std::uint64_t seed = 0x5eed5eed;
};

OrbitResult orbit_bfs(i64 p, int n, OrbitClass cls,
                      const OrbitOptions& opt = {});

struct OrbitReport {
  i64 p = 0;
  int n = 1;
  OrbitClass cls = OrbitClass::ur_sp;
  std::uint64_t orbit_size = 0;
  Rat volume;
  Rat epsilon_expected;
  Rat relation_factor;
  bool ok = false;  // relation factor landed in {1, 2}
};

// Closed-form orbital density for the standard representative.
Rat epsilon_closed_form(i64 q, OrbitClass cls);

// Expected relation vol(Kx)/epsilon where the source pins it: 2 for
// (rm ur), 1 for (ur rm) and (rm rm); 0 means measured only.
int expected_relation_factor(OrbitClass cls);

OrbitReport epsilon_from_orbit(i64 p, OrbitClass cls,
                               const OrbitOptions& opt = {});
int default_n(i64 p, OrbitClass cls);

// Solutions (u, s) mod p^n of 2u + a1 s = a1, u^2 + a1 s u + a2 s^2 = a2.
i64 stabilizer_congruence_count(i64 p, int n, i64 a1, i64 a2);

// Ramified standard-representative data (a1, a2, n) for given (p, delta).
struct StabParams {
  i64 a1 = 0, a2 = 0;
  int n = 0;
  int delta = 0;
};
StabParams stab_params(i64 p, int delta);

// Coefficients of the majorant series in t = q^{-s} up to t^N.
// Fatal error if any coefficient is negative.
std::vector<Int> majorant_series(i64 q, int N);

i64 least_nonresidue(i64 p);

}  // namespace qm
