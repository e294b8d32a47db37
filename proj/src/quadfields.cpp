#include "qm/quadfields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <utility>

namespace qm {

namespace {

constexpr char kCacheHeader[] = "#quadmoment-hr-v1";
constexpr double kPi = 3.14159265358979323846264338327950288;

i64 isqrt_i(i64 n) {
  i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

void kahan_add(double& sum, double& comp, double term) {
  double y = term - comp;
  double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

// Continued-fraction walk of (P0 + sqrt(d))/2; returns the periodic part.
std::vector<std::pair<i64, i64>> pq_cycle(i64 d) {
  i64 sq = isqrt_i(d);
  i64 P = d & 1, Q = 2;
  std::unordered_map<std::uint64_t, int> seen;
  std::vector<std::pair<i64, i64>> states;
  for (;;) {
    std::uint64_t key =
        (static_cast<std::uint64_t>(P) << 32) | static_cast<std::uint64_t>(Q);
    auto it = seen.find(key);
    if (it != seen.end())
      return std::vector<std::pair<i64, i64>>(states.begin() + it->second,
                                              states.end());
    seen.emplace(key, static_cast<int>(states.size()));
    states.emplace_back(P, Q);
    i64 a = (P + sq) / Q;
    i64 Pn = a * Q - P;
    Q = (d - Pn * Pn) / Q;
    P = Pn;
  }
}

}  // namespace

std::vector<i64> enumerate_discs(i64 X, const STuple& s) {
  std::vector<i64> out;
  int sign = s.arch == ArchKind::CC ? -1 : 1;
  for (i64 n = 3; n <= X; ++n) {
    i64 d = sign * n;
    if (!matches(d, s)) continue;
    out.push_back(d);
  }
  return out;
}

i64 class_number_imag_forms(i64 d) {
  if (d >= 0 || !is_fundamental(d))
    throw std::invalid_argument("form count needs a fundamental d < 0");
  i64 D = -d;
  i64 h = 0;
  for (i64 b = D & 1; 3 * b * b <= D; b += 2) {
    i64 m = (b * b + D) / 4;
    for (i64 a = std::max<i64>(b, 1); a * a <= m; ++a) {
      if (m % a) continue;
      h += (b == 0 || b == a || a * a == m) ? 1 : 2;
    }
  }
  return h;
}

ImagSieve sieve_class_numbers_imag(i64 X) {
  if (X < 3) throw std::invalid_argument("sieve bound too small");
  ImagSieve sv;
  sv.X = X;
  sv.h.assign(X + 1, 0);
  sv.fundamental.assign(X + 1, false);
  std::vector<bool> sf(X + 1, true);
  for (i64 p = 2; p * p <= X; ++p)
    for (i64 j = p * p; j <= X; j += p * p) sf[j] = false;
  for (i64 n = 3; n <= X; ++n) {
    if ((n & 3) == 3) {
      sv.fundamental[n] = sf[n];
    } else if ((n & 3) == 0) {
      i64 u = n / 4;
      i64 um = u & 3;
      sv.fundamental[n] = (um == 1 || um == 2) && sf[u];
    }
  }
  for (i64 a = 1; 3 * a * a <= X; ++a) {
    for (i64 b = 0; b <= a; ++b) {
      i64 D = 4 * a * a - b * b;  // c == a; D shrinks as b grows
      if (D > X) continue;
      sv.h[D] += 1;
      std::uint16_t w = (b == 0 || b == a) ? 1 : 2;
      for (i64 D2 = D + 4 * a; D2 <= X; D2 += 4 * a) sv.h[D2] += w;
    }
  }
  return sv;
}

i64 ImagSieve::get(i64 d) const {
  if (d >= 0 || -d > X || !fundamental[-d])
    throw std::invalid_argument("sieve holds fundamental d < 0 with |d| <= X");
  return h[-d];
}

i64 class_number_imag_analytic(i64 d) {
  if (d >= 0 || !is_fundamental(d))
    throw std::invalid_argument("character sum needs a fundamental d < 0");
  if (d == -3 || d == -4) return 1;
  i64 D = -d;
  i64 s = 0;
  for (i64 a = 1; 2 * a < D; ++a) s += kronecker(d, a);
  i64 den = 2 - kronecker(d, 2);
  if (s <= 0 || s % den) throw std::runtime_error("bad character sum");
  return s / den;
}

double regulator_real(i64 d) {
  if (d <= 0 || !is_fundamental(d))
    throw std::invalid_argument("regulator needs a fundamental d > 0");
  double sd = std::sqrt(static_cast<double>(d));
  double sum = 0, comp = 0;
  for (auto [P, Q] : pq_cycle(d))
    kahan_add(sum, comp, std::log((P + sd) / Q));
  return sum;
}

PellUnit fundamental_unit_exact(i64 d) {
  if (d <= 0 || !is_fundamental(d))
    throw std::invalid_argument("pell unit needs a fundamental d > 0");
  using boost::multiprecision::cpp_int;
  cpp_int x = 1, y = 0, den = 1;
  for (auto [P, Q] : pq_cycle(d)) {
    cpp_int nx = x * P + y * d;
    cpp_int ny = x + y * P;
    x = nx;
    y = ny;
    den *= Q;
    cpp_int g = gcd(gcd(x, y), den);
    if (g > 1) {
      x /= g;
      y /= g;
      den /= g;
    }
  }
  cpp_int X = 2 * x, Y = 2 * y;
  if (X % den != 0 || Y % den != 0)
    throw std::runtime_error("unit reconstruction failed");
  X /= den;
  Y /= den;
  cpp_int n4 = X * X - cpp_int(d) * Y * Y;
  if (n4 != 4 && n4 != -4) throw std::runtime_error("unit norm check failed");
  PellUnit u;
  u.x = X;
  u.y = Y;
  u.norm = n4 == 4 ? 1 : -1;
  return u;
}

double l_one_chi(i64 d, double target_abs_err, double* abs_err) {
  if (!is_fundamental(d))
    throw std::invalid_argument("L(1) needs a fundamental discriminant");
  const i64 D = d < 0 ? -d : d;
  double L, bound;
  if (d < 0) {
    i64 s = 0;  // exact integer character sum
    for (i64 a = 1; a < D; ++a) s += kronecker(d, a) * a;
    L = -kPi * static_cast<double>(s) /
        (std::sqrt(static_cast<double>(D)) * static_cast<double>(D));
    bound = 1e-15 * (std::fabs(L) + 1);
  } else {
    // chi is even: fold a <-> d - a
    double sum = 0, comp = 0, scale = 0;
    i64 count = 0;
    for (i64 a = 1; 2 * a < D; ++a) {
      int chi = kronecker(d, a);
      if (!chi) continue;
      double t = std::log(std::sin(kPi * static_cast<double>(a) / D));
      kahan_add(sum, comp, chi * t);
      scale += std::fabs(t);
      ++count;
    }
    L = -2 * sum / std::sqrt(static_cast<double>(D));
    bound = 1e-15 * (scale + static_cast<double>(count)) /
                std::sqrt(static_cast<double>(D)) +
            1e-15 * (std::fabs(L) + 1);
  }
  if (bound > target_abs_err)
    throw std::invalid_argument("requested L-value accuracy beyond precision");
  if (abs_err) *abs_err = bound;
  return L;
}

HRCache::HRCache(std::string path) : path_(std::move(path)) {
  std::ifstream f(path_);
  if (!f.good()) return;
  std::string line;
  if (!std::getline(f, line)) return;
  if (line == kCacheHeader) {
    // fall through to the record loop
  } else {
    throw std::runtime_error("unrecognized cache header in " + path_);
  }
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw std::runtime_error("malformed cache record: " + line);
    FieldRecord rec;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + c1, rec.d);
    auto r2 = std::from_chars(b + c1 + 1, b + c2, rec.h);
    auto r3 = std::from_chars(b + c2 + 1, b + line.size(), rec.R);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r3.ec != std::errc{})
      throw std::runtime_error("malformed cache record: " + line);
    map_[rec.d] = rec;
  }
}

bool HRCache::get(i64 d, FieldRecord* out) const {
  auto it = map_.find(d);
  if (it == map_.end()) return false;
  if (out) *out = it->second;
  return true;
}

void HRCache::put(const FieldRecord& rec) { map_[rec.d] = rec; }

void HRCache::flush() const {
  if (path_.empty()) return;
  std::string tmp = path_ + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f.good()) throw std::runtime_error("cannot write " + tmp);
    f << kCacheHeader << '\n';
    std::vector<const FieldRecord*> recs;
    recs.reserve(map_.size());
    for (auto& [d, r] : map_) recs.push_back(&r);
    std::sort(recs.begin(), recs.end(),
              [](const FieldRecord* a, const FieldRecord* b) {
                i64 aa = a->abs_norm_disc(), bb = b->abs_norm_disc();
                return aa != bb ? aa < bb : a->d < b->d;
              });
    char buf[64];
    for (auto* r : recs) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, r->R,
                                   std::chars_format::general, 12);
      f << r->d << ',' << r->h << ',' << std::string_view(buf, p - buf)
        << '\n';
    }
    if (!f.good()) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path_.c_str()) != 0)
    throw std::runtime_error("cannot replace " + path_);
}

FieldRecord hR(i64 d, HRCache* cache) {
  if (!is_fundamental(d))
    throw std::invalid_argument("hR needs a fundamental discriminant");
  if (cache) {
    FieldRecord rec;
    if (cache->get(d, &rec)) return rec;
  }
  FieldRecord rec;
  rec.d = d;
  if (d < 0) {
    rec.h = class_number_imag_forms(d);
    rec.R = 1.0;
  } else {
    double R = regulator_real(d);
    double L = l_one_chi(d, 1e-6);
    double hh = std::sqrt(static_cast<double>(d)) * L / (2 * R);
    i64 h = std::llround(hh);
    if (std::fabs(hh - static_cast<double>(h)) >= 0.01)
      throw std::runtime_error("class number residual guard tripped");
    if (h < 1) throw std::runtime_error("class number must be positive");
    rec.h = h;
    rec.R = R;
  }
  if (cache) cache->put(rec);
  return rec;
}

}  // namespace qm
