#include "qm/orbitcount.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <utility>

namespace qm {

namespace {

i64 norm_mod(i64 x, i64 m) { return ((x % m) + m) % m; }

i64 powmod(i64 b, i64 e, i64 m) {
  i64 r = 1;
  b = norm_mod(b, m);
  while (e > 0) {
    if (e & 1) r = static_cast<i64>(static_cast<__int128>(r) * b % m);
    b = static_cast<i64>(static_cast<__int128>(b) * b % m);
    e >>= 1;
  }
  return r;
}

// Generator of (Z/p^n)^x for odd p: a primitive root mod p lifted so that
// g^(p-1) != 1 mod p^2.
i64 primitive_root_mod_pn(i64 p, int n) {
  std::vector<i64> fac;
  i64 t = p - 1;
  for (i64 q = 2; q * q <= t; ++q) {
    if (t % q) continue;
    fac.push_back(q);
    while (t % q == 0) t /= q;
  }
  if (t > 1) fac.push_back(t);
  i64 g = 2;
  for (;; ++g) {
    bool ok = true;
    for (i64 q : fac)
      if (powmod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    if (ok) break;
  }
  if (n > 1 && powmod(g, p - 1, p * p) == 1) g += p;
  return g;
}

// Quadratic subring (Z/m)[theta]; theta^2 = u at odd p, theta^2 = theta + 1
// at p = 2.
struct ThetaRing {
  i64 m = 0, u = 0;
  bool dyadic = false;
  using E2 = std::array<i64, 2>;
  E2 mul(const E2& x, const E2& y) const {
    i64 a = x[0], b = x[1], c = y[0], d = y[1];
    if (dyadic) return {(a * c + b * d) % m, (a * d + b * c + b * d) % m};
    return {(a * c + u * b * d) % m, (a * d + b * c) % m};
  }
  E2 sigma(const E2& x) const {
    if (dyadic) return {(x[0] + x[1]) % m, (m - x[1]) % m};
    return {x[0], (m - x[1]) % m};
  }
  E2 add(const E2& x, const E2& y) const {
    return {(x[0] + y[0]) % m, (x[1] + y[1]) % m};
  }
  E2 smul(i64 r, const E2& x) const {
    r = norm_mod(r, m);
    return {r * x[0] % m, r * x[1] % m};
  }
  i64 norm(const E2& x) const {
    i64 a = x[0], b = x[1];
    i64 v = dyadic ? a * a + a * b - b * b : a * a - u * b * b;
    return norm_mod(v, m);
  }
};

}  // namespace

std::string orbit_class_name(OrbitClass c) {
  switch (c) {
    case OrbitClass::ur_sp:
      return "ur-sp";
    case OrbitClass::ur_ur:
      return "ur-ur";
    case OrbitClass::ur_rm:
      return "ur-rm";
    case OrbitClass::rm_ur:
      return "rm-ur";
    case OrbitClass::rm_rm:
      return "rm-rm";
  }
  return "?";
}

FiniteRing::FiniteRing(i64 p_, int n_) : p(p_), n(n_) {
  if (p < 2 || n < 1) throw std::invalid_argument("bad finite ring parameters");
  mod = 1;
  for (int i = 0; i < n; ++i) {
    mod *= p;
    if (mod > (i64(1) << 31)) throw std::invalid_argument("modulus too large");
  }
}

Elt MatrixAlgebra::add(const Elt& a, const Elt& b) const {
  i64 m = R.mod;
  return Elt{{(a.c[0] + b.c[0]) % m, (a.c[1] + b.c[1]) % m,
              (a.c[2] + b.c[2]) % m, (a.c[3] + b.c[3]) % m}};
}

Elt MatrixAlgebra::mul(const Elt& a, const Elt& b) const {
  i64 m = R.mod;
  return Elt{{(a.c[0] * b.c[0] + a.c[1] * b.c[2]) % m,
              (a.c[0] * b.c[1] + a.c[1] * b.c[3]) % m,
              (a.c[2] * b.c[0] + a.c[3] * b.c[2]) % m,
              (a.c[2] * b.c[1] + a.c[3] * b.c[3]) % m}};
}

Elt MatrixAlgebra::scale(i64 r, const Elt& a) const {
  i64 m = R.mod;
  r = norm_mod(r, m);
  return Elt{{r * a.c[0] % m, r * a.c[1] % m, r * a.c[2] % m, r * a.c[3] % m}};
}

i64 MatrixAlgebra::norm(const Elt& a) const {
  return norm_mod(a.c[0] * a.c[3] - a.c[1] * a.c[2], R.mod);
}

bool MatrixAlgebra::is_unit(const Elt& a) const { return norm(a) % R.p != 0; }

QuaternionAlgebra::QuaternionAlgebra(FiniteRing r) : R(r) {
  dyadic = R.p == 2;
  u = dyadic ? 0 : least_nonresidue(R.p);
}

Elt QuaternionAlgebra::add(const Elt& a, const Elt& b) const {
  i64 m = R.mod;
  return Elt{{(a.c[0] + b.c[0]) % m, (a.c[1] + b.c[1]) % m,
              (a.c[2] + b.c[2]) % m, (a.c[3] + b.c[3]) % m}};
}

Elt QuaternionAlgebra::mul(const Elt& a, const Elt& b) const {
  ThetaRing T{R.mod, u, dyadic};
  ThetaRing::E2 a1{a.c[0], a.c[1]}, b1{a.c[2], a.c[3]};
  ThetaRing::E2 a2{b.c[0], b.c[1]}, b2{b.c[2], b.c[3]};
  // (a1 + b1 rt)(a2 + b2 rt) = (a1 a2 + p b1 sigma(b2)) + (a1 b2 + b1 sigma(a2)) rt
  ThetaRing::E2 ra = T.add(T.mul(a1, a2), T.smul(R.p, T.mul(b1, T.sigma(b2))));
  ThetaRing::E2 rb = T.add(T.mul(a1, b2), T.mul(b1, T.sigma(a2)));
  return Elt{{ra[0], ra[1], rb[0], rb[1]}};
}

Elt QuaternionAlgebra::scale(i64 r, const Elt& a) const {
  i64 m = R.mod;
  r = norm_mod(r, m);
  return Elt{{r * a.c[0] % m, r * a.c[1] % m, r * a.c[2] % m, r * a.c[3] % m}};
}

i64 QuaternionAlgebra::norm(const Elt& a) const {
  ThetaRing T{R.mod, u, dyadic};
  i64 na = T.norm({a.c[0], a.c[1]});
  i64 nb = T.norm({a.c[2], a.c[3]});
  return norm_mod(na - R.p * nb, R.mod);
}

bool QuaternionAlgebra::is_unit(const Elt& a) const {
  return norm(a) % R.p != 0;
}

i64 least_nonresidue(i64 p) {
  if (p == 2) throw std::invalid_argument("no nonresidue convention at p = 2");
  for (i64 a = 2; a < p; ++a)
    if (kronecker(a, p) == -1) return a;
  throw std::invalid_argument("p must be an odd prime");
}

StdRep std_rep(i64 p, int n, OrbitClass cls) {
  FiniteRing R(p, n);
  i64 m = R.mod;
  StdRep r;
  switch (cls) {
    case OrbitClass::ur_sp:
      r.x.x1 = Elt{{1, 0, 0, 1}};
      r.x.x2 = Elt{{0, 0, 1, 1}};
      r.P_exact = 1;
      r.delta = 0;
      return r;
    case OrbitClass::ur_ur: {
      i64 c = 1;
      while (kronecker(1 - 4 * c, p) != -1) ++c;
      r.x.x1 = Elt{{1, 0, 0, 1}};
      r.x.x2 = Elt{{0, norm_mod(-c, m), 1, 1}};
      r.P_exact = 1 - 4 * c;
      r.delta = 0;
      return r;
    }
    case OrbitClass::ur_rm: {
      if (p == 2)
        throw std::invalid_argument(
            "dyadic ramified representative needs a discriminant exponent");
      auto sp = stab_params(p, 1);
      i64 a1 = sp.a1, a2 = sp.a2;
      r.x.x1 = Elt{{0, 1, 1, norm_mod(a1, m)}};
      r.x.x2 = Elt{{1, norm_mod(a1, m), norm_mod(a1, m),
                    norm_mod(a1 * a1 - a2, m)}};
      r.P_exact = a1 * a1 - 4 * a2;
      r.delta = 1;
      return r;
    }
    case OrbitClass::rm_ur: {
      r.x.x1 = Elt{{1, 0, 0, 0}};
      r.x.x2 = Elt{{0, 1, 0, 0}};
      if (p == 2) {
        r.P_exact = 5;  // disc of x^2 + x - 1
      } else {
        r.P_exact = 4 * least_nonresidue(p);
      }
      r.delta = 0;
      return r;
    }
    case OrbitClass::rm_rm: {
      if (p == 2)
        throw std::invalid_argument(
            "dyadic ramified representative needs a discriminant exponent");
      r.x.x1 = Elt{{1, 0, 0, 0}};
      r.x.x2 = Elt{{0, 0, 1, 0}};
      r.P_exact = 4 * p;
      r.delta = 1;
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

boost::multiprecision::cpp_int group_order(i64 p, int n, bool ramified) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::pow;
  cpp_int q = p;
  cpp_int gl2 = pow(q, 4 * n - 3) * (q - 1) * (q * q - 1);
  if (!ramified) return gl2 * gl2 * gl2;
  cpp_int ox = pow(q, 4 * n - 2) * (q * q - 1);
  return ox * ox * gl2;
}

namespace {

Elt omega_gen(const QuaternionAlgebra& A) {
  i64 p = A.R.p;
  ThetaRing Tp{p, A.u % p, A.dyadic};
  i64 target = p * p - 1;
  for (i64 a = 0; a < p; ++a)
    for (i64 b = 0; b < p; ++b) {
      if (a == 0 && b == 0) continue;
      if (Tp.norm({a, b}) % p == 0) continue;
      ThetaRing::E2 x{a, b}, acc{1, 0};
      i64 ord = 0;
      do {
        acc = Tp.mul(acc, x);
        ++ord;
      } while (!(acc[0] == 1 && acc[1] == 0) && ord <= target);
      if (ord == target) return Elt{{a, b, 0, 0}};
    }
  throw std::logic_error("no residue field generator found");
}

std::vector<Elt> matrix_unit_gens(const FiniteRing& R) {
  i64 m = R.mod;
  std::vector<Elt> g;
  g.push_back(Elt{{1, 1, 0, 1}});
  g.push_back(Elt{{1, 0, 1, 1}});
  if (R.p == 2) {
    g.push_back(Elt{{(m - 1) % m, 0, 0, 1}});
    if (R.n >= 3) g.push_back(Elt{{5 % m, 0, 0, 1}});
  } else {
    g.push_back(Elt{{primitive_root_mod_pn(R.p, R.n), 0, 0, 1}});
  }
  g.push_back(Elt{{0, 1, 1, 0}});
  return g;
}

std::vector<Elt> quaternion_unit_gens(const QuaternionAlgebra& A) {
  i64 m = A.R.mod, p = A.R.p;
  std::vector<Elt> g;
  g.push_back(omega_gen(A));
  g.push_back(Elt{{0, 1, 0, 0}});        // theta
  g.push_back(Elt{{(1 + p) % m, 0, 0, 0}});
  g.push_back(Elt{{1, p % m, 0, 0}});
  g.push_back(Elt{{1, 0, 1, 0}});        // 1 + rt
  g.push_back(Elt{{1, 0, 0, 1}});        // 1 + theta rt
  g.push_back(Elt{{1, 0, p % m, 0}});
  g.push_back(Elt{{1, 0, 0, p % m}});
  return g;
}

std::vector<i64> coeff_scale_factors(const FiniteRing& R) {
  if (R.p == 2) {
    std::vector<i64> v{(R.mod - 1) % R.mod};
    if (R.n >= 3) v.push_back(5 % R.mod);
    return v;
  }
  return {primitive_root_mod_pn(R.p, R.n)};
}

template <typename Alg>
Elt random_unit(const Alg& A, std::mt19937_64& rng) {
  i64 m = A.R.mod;
  for (;;) {
    Elt e;
    for (auto& x : e.c)
      x = static_cast<i64>(rng() % static_cast<std::uint64_t>(m));
    if (A.is_unit(e)) return e;
  }
}

template <typename Alg>
OrbitResult run_bfs(const Alg& A, const VPoint& x0, const FiniteRing& R,
                    const std::vector<Elt>& ugens, const OrbitOptions& opt) {
  const i64 m = R.mod;
  unsigned __int128 space = 1;
  for (int i = 0; i < 8; ++i) space *= static_cast<std::uint64_t>(m);
  if (space > (static_cast<unsigned __int128>(1) << 62))
    throw std::runtime_error("state space too large for a dense index");
  const std::uint64_t S = static_cast<std::uint64_t>(space);
  const std::uint64_t bitmap_bytes = S / 8 + 8;
  if (bitmap_bytes > opt.mem_cap_bytes)
    throw std::runtime_error("visited bitmap would exceed the memory cap");

  std::vector<std::uint64_t> bits(S / 64 + 1, 0);
  auto pack = [m](const VPoint& x) {
    std::uint64_t idx = 0;
    for (int i = 3; i >= 0; --i)
      idx = idx * static_cast<std::uint64_t>(m) +
            static_cast<std::uint64_t>(x.x2.c[i]);
    for (int i = 3; i >= 0; --i)
      idx = idx * static_cast<std::uint64_t>(m) +
            static_cast<std::uint64_t>(x.x1.c[i]);
    return idx;
  };
  auto unpack = [m](std::uint64_t idx) {
    VPoint x;
    for (int i = 0; i < 4; ++i) {
      x.x1.c[i] = static_cast<i64>(idx % static_cast<std::uint64_t>(m));
      idx /= static_cast<std::uint64_t>(m);
    }
    for (int i = 0; i < 4; ++i) {
      x.x2.c[i] = static_cast<i64>(idx % static_cast<std::uint64_t>(m));
      idx /= static_cast<std::uint64_t>(m);
    }
    return x;
  };

  std::vector<std::uint64_t> stack;
  std::uint64_t count = 0;
  auto visit = [&](std::uint64_t idx) {
    std::uint64_t w = idx >> 6, b = std::uint64_t(1) << (idx & 63);
    if (bits[w] & b) return;
    bits[w] |= b;
    ++count;
    stack.push_back(idx);
    if ((count & 0xFFFFF) == 0 &&
        bitmap_bytes + stack.capacity() * 8 > opt.mem_cap_bytes)
      throw std::runtime_error("orbit stack exceeds the memory cap");
  };

  const std::vector<i64> scales = coeff_scale_factors(R);
  visit(pack(x0));
  while (!stack.empty()) {
    VPoint x = unpack(stack.back());
    stack.pop_back();
    for (const Elt& g : ugens) {
      visit(pack(VPoint{A.mul(g, x.x1), A.mul(g, x.x2)}));
      visit(pack(VPoint{A.mul(x.x1, g), A.mul(x.x2, g)}));
    }
    visit(pack(VPoint{A.add(x.x1, x.x2), x.x2}));
    visit(pack(VPoint{x.x1, A.add(x.x2, x.x1)}));
    for (i64 r : scales) visit(pack(VPoint{A.scale(r, x.x1), x.x2}));
    visit(pack(VPoint{x.x2, x.x1}));
  }

  OrbitResult res;
  res.orbit_size = count;
  res.state_space = S;

  // escape check: random full group elements built directly, never via the
  // generator closure, must land inside the enumerated orbit and satisfy
  // the character relation on the relative invariant
  std::mt19937_64 rng(opt.seed);
  MatrixAlgebra coeff{R};
  const i64 P0 = rel_invariant(x0, A);
  bool ok = true;
  for (int it = 0; it < opt.random_checks && ok; ++it) {
    Elt g11 = random_unit(A, rng);
    Elt g12 = random_unit(A, rng);
    Elt g2 = random_unit(coeff, rng);  // invertible coefficient matrix
    VPoint y;
    y.x1 = A.mul(A.mul(g11, A.add(A.scale(g2.c[0], x0.x1),
                                  A.scale(g2.c[1], x0.x2))),
                 g12);
    y.x2 = A.mul(A.mul(g11, A.add(A.scale(g2.c[2], x0.x1),
                                  A.scale(g2.c[3], x0.x2))),
                 g12);
    std::uint64_t idx = pack(y);
    std::uint64_t w = idx >> 6, b = std::uint64_t(1) << (idx & 63);
    if (!(bits[w] & b)) {
      ok = false;
      break;
    }
    i64 chi = A.norm(g11) % m;
    chi = chi * (A.norm(g12) % m) % m;
    chi = chi * coeff.norm(g2) % m;
    chi = chi * chi % m;
    if (rel_invariant(y, A) != chi * P0 % m) ok = false;
  }
  res.escape_check_passed = ok;
  return res;
}

}  // namespace

OrbitResult orbit_bfs(i64 p, int n, OrbitClass cls, const OrbitOptions& opt) {
  FiniteRing R(p, n);
  StdRep rep = std_rep(p, n, cls);
  if (cls == OrbitClass::rm_ur || cls == OrbitClass::rm_rm) {
    QuaternionAlgebra A{R};
    return run_bfs(A, rep.x, R, quaternion_unit_gens(A), opt);
  }
  MatrixAlgebra A{R};
  return run_bfs(A, rep.x, R, matrix_unit_gens(R), opt);
}

Rat epsilon_closed_form(i64 q, OrbitClass cls) {
  Rat qi(1, q);
  Rat half(1, 2);
  switch (cls) {
    case OrbitClass::ur_sp:
      return half * (1 + qi) * (1 - qi * qi) * (1 - qi * qi);
    case OrbitClass::ur_ur:
      return half * (1 - qi) * (1 - qi) * (1 - qi) * (1 - qi * qi);
    case OrbitClass::ur_rm: {
      if (q == 2)
        throw std::invalid_argument("dyadic case needs an explicit exponent");
      Rat t = 1 - qi * qi;
      return half * qi * (1 - qi) * t * t * t;
    }
    case OrbitClass::rm_ur:
      return half * (1 - qi * qi) * (1 - qi);
    case OrbitClass::rm_rm: {
      if (q == 2)
        throw std::invalid_argument("dyadic case needs an explicit exponent");
      Rat t = 1 - qi * qi;
      return half * qi * (1 + qi) * t * t;
    }
  }
  throw std::logic_error("unreachable");
}

int expected_relation_factor(OrbitClass cls) {
  switch (cls) {
    case OrbitClass::rm_ur:
      return 2;
    case OrbitClass::ur_rm:
    case OrbitClass::rm_rm:
      return 1;
    default:
      return 0;  // measured only
  }
}

int default_n(i64 p, OrbitClass cls) {
  switch (cls) {
    case OrbitClass::ur_sp:
    case OrbitClass::ur_ur:
    case OrbitClass::rm_ur:
      return 1;
    case OrbitClass::ur_rm:
    case OrbitClass::rm_rm:
      if (p == 2)
        throw std::invalid_argument("dyadic exponent is not determined");
      return 2;
  }
  throw std::logic_error("unreachable");
}

OrbitReport epsilon_from_orbit(i64 p, OrbitClass cls, const OrbitOptions& opt) {
  OrbitReport rep;
  rep.p = p;
  rep.n = default_n(p, cls);
  rep.cls = cls;
  OrbitResult r = orbit_bfs(p, rep.n, cls, opt);
  rep.orbit_size = r.orbit_size;
  Int den = 1;
  for (int i = 0; i < 8 * rep.n; ++i) den *= p;
  rep.volume = Rat(Int(r.orbit_size), den);
  rep.epsilon_expected = epsilon_closed_form(p, cls);
  rep.relation_factor = rep.volume / rep.epsilon_expected;
  int want = expected_relation_factor(cls);
  bool rel_ok = rep.relation_factor == 1 || rep.relation_factor == 2;
  if (want != 0) rel_ok = rep.relation_factor == want;
  rep.ok = rel_ok && r.escape_check_passed;
  return rep;
}

i64 stabilizer_congruence_count(i64 p, int n, i64 a1, i64 a2) {
  FiniteRing R(p, n);
  i64 m = R.mod;
  i64 count = 0;
  for (i64 u = 0; u < m; ++u)
    for (i64 s = 0; s < m; ++s) {
      if (norm_mod(2 * u + a1 * s - a1, m) != 0) continue;
      if (norm_mod(u * u + a1 * s * u + a2 * s * s - a2, m) != 0) continue;
      ++count;
    }
  return count;
}

StabParams stab_params(i64 p, int delta) {
  if (p == 2) {
    if (delta == 2) return StabParams{2, 2, 5, 2};
    if (delta == 3) return StabParams{0, -2, 6, 3};
    throw std::invalid_argument("dyadic exponent must be 2 or 3");
  }
  if (delta != 1)
    throw std::invalid_argument("odd ramification exponent must be 1");
  return StabParams{0, -least_nonresidue(p) * p, 2, 1};
}

std::vector<Int> majorant_series(i64 q, int N) {
  if (N < 0) throw std::invalid_argument("series length must be nonnegative");
  Int Q = q;
  std::vector<Int> num(N + 1, 0), den(N + 1, 0), l(N + 1, 0);
  if (N >= 0) num[0] = 1;
  if (N >= 2) num[2] = 29 * Q * Q;
  if (N >= 4) num[4] = -21 * Q * Q * Q * Q;
  if (N >= 6) num[6] = 7 * Q * Q * Q * Q * Q * Q;
  // den = (1 - q t^2)(1 - q^2 t^2)^4
  std::vector<Int> d{1, 0, -Q};
  std::vector<Int> f{1, 0, -Q * Q};
  for (int rep = 0; rep < 4; ++rep) {
    std::vector<Int> nd(std::min<std::size_t>(d.size() + 2, N + 1), 0);
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j)
        if (i + j < nd.size()) nd[i + j] += d[i] * f[j];
    d = std::move(nd);
  }
  den.assign(N + 1, 0);
  for (std::size_t i = 0; i < d.size() && i <= std::size_t(N); ++i)
    den[i] = d[i];
  for (int k = 0; k <= N; ++k) {
    Int acc = num[k];
    for (int j = 1; j <= k; ++j) acc -= den[j] * l[k - j];
    l[k] = acc;  // den[0] == 1
    if (l[k] < 0) throw std::runtime_error("negative majorant coefficient");
  }
  return l;
}

}  // namespace qm
