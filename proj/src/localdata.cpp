#include "qm/localdata.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <utility>

namespace qm {

namespace {

bool is_prime(i64 n) {
  if (n < 2) return false;
  for (i64 i = 2; i * i <= n; ++i)
    if (n % i == 0) return false;
  return true;
}

std::vector<i64> prime_factors(i64 n) {
  std::vector<i64> out;
  n = n < 0 ? -n : n;
  for (i64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) out.push_back(n);
  return out;
}

i64 mod4(i64 x) { return ((x % 4) + 4) % 4; }
i64 mod8(i64 x) { return ((x % 8) + 8) % 8; }

}  // namespace

int kronecker(i64 a, i64 n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  int r = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) r = -r;
  }
  while (n % 2 == 0) {
    n /= 2;
    if (a % 2 == 0) return 0;
    i64 am = mod8(a);
    if (am == 3 || am == 5) r = -r;
  }
  if (n == 1) return r;
  a %= n;
  if (a < 0) a += n;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      i64 nm = n % 8;
      if (nm == 3 || nm == 5) r = -r;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) r = -r;
    a %= n;
  }
  return n == 1 ? r : 0;
}

bool is_squarefree(i64 x) {
  if (x == 0) return false;
  if (x < 0) x = -x;
  for (i64 i = 2; i * i <= x; ++i)
    if (x % (i * i) == 0) return false;
  return true;
}

bool is_fundamental(i64 d) {
  if (d == 0 || d == 1) return false;
  if (mod4(d) == 1) return is_squarefree(d);
  if (mod4(d) == 0) {
    i64 w = d / 4;
    i64 wm = mod4(w);
    return (wm == 2 || wm == 3) && is_squarefree(w);
  }
  return false;
}

int field_place_count(const STuple& s) {
  int n = s.arch == ArchKind::CC ? 1 : 0;
  for (auto& [p, c] : s.finite)
    if (c.kind != Kind::Split) ++n;
  return n;
}

QuadClass local_class(i64 d, i64 p) {
  QuadClass c;
  if (p == 2) {
    if (d % 2 != 0) {
      c.kind = mod8(d) == 1 ? Kind::Split : Kind::Inert;
      return c;
    }
    i64 w = d / 4;
    c.kind = Kind::Ramified;
    if (mod4(w) == 3) {
      c.delta = 2;
      c.tag = static_cast<int>(mod8(w));
    } else {
      c.delta = 3;
      c.tag = static_cast<int>(mod8(d / 8));
    }
    return c;
  }
  if (d % p != 0) {
    c.kind = kronecker(d, p) == 1 ? Kind::Split : Kind::Inert;
    return c;
  }
  c.kind = Kind::Ramified;
  c.delta = 1;
  c.tag = kronecker(d / p, p);
  return c;
}

bool matches(i64 d, const STuple& s) {
  if (!is_fundamental(d)) return false;
  if ((d < 0) != (s.arch == ArchKind::CC)) return false;
  for (auto& [p, want] : s.finite) {
    QuadClass got = local_class(d, p);
    if (got.kind != want.kind) return false;
    if (want.kind == Kind::Ramified) {
      if (got.delta != want.delta) return false;
      if (want.tag && got.tag != want.tag) return false;
    }
  }
  return true;
}

i64 dual_disc(i64 d, i64 m) {
  if (!is_fundamental(d) || !is_fundamental(m))
    throw std::invalid_argument("dual_disc needs fundamental discriminants");
  auto kernel = [](i64 x) { return mod4(x) == 0 ? x / 4 : x; };
  i64 kd = kernel(d), km = kernel(m);
  i64 g = std::gcd(kd, km);
  i64 n0 = (kd / g) * (km / g);
  if (n0 == 1) throw std::invalid_argument("dual_disc undefined at d == m");
  return mod4(n0) == 1 ? n0 : 4 * n0;
}

SplitType splitting_in_ktilde(i64 p, i64 m) {
  QuadClass c = local_class(m, p);
  switch (c.kind) {
    case Kind::Split:
      return SplitType::sp;
    case Kind::Inert:
      return SplitType::in;
    default:
      return SplitType::rm;
  }
}

i64 count_ramified_classes(i64 q, int delta, int m_v) {
  if (delta == 2 * m_v + 1) {
    i64 r = 2;
    for (int i = 0; i < m_v; ++i) r *= q;
    return r;
  }
  if (delta >= 2 && delta % 2 == 0 && delta / 2 <= m_v) {
    i64 r = 2 * (q - 1);
    for (int i = 1; i < delta / 2; ++i) r *= q;
    return r;
  }
  throw std::invalid_argument("no ramified classes with that discriminant exponent");
}

STuple parse_stuple(const std::string& text) {
  STuple s;
  std::size_t pos = 0;
  bool first = true;
  while (true) {
    std::size_t semi = text.find(';', pos);
    std::string tok = semi == std::string::npos ? text.substr(pos)
                                                : text.substr(pos, semi - pos);
    if (first) {
      if (tok == "inf=C")
        s.arch = ArchKind::CC;
      else if (tok == "inf=R")
        s.arch = ArchKind::RR;
      else
        throw ParseError("expected inf=C or inf=R", tok.empty() ? "inf" : tok,
                         pos);
      first = false;
    } else {
      if (tok.empty()) throw ParseError("empty entry", "", pos);
      std::size_t eq = tok.find('=');
      if (eq == std::string::npos)
        throw ParseError("expected <p>=<class>", tok, pos);
      std::string ptok = tok.substr(0, eq);
      i64 p = 0;
      auto [ptr, ec] = std::from_chars(ptok.data(), ptok.data() + ptok.size(), p);
      if (ec != std::errc{} || ptr != ptok.data() + ptok.size())
        throw ParseError("prime expected", ptok, pos);
      if (!is_prime(p)) throw ParseError("not a prime", ptok, pos);
      if (s.finite.count(p)) throw ParseError("duplicate prime", ptok, pos);
      std::string ctok = tok.substr(eq + 1);
      std::size_t cpos = pos + eq + 1;
      QuadClass c;
      if (ctok == "sp") {
        c.kind = Kind::Split;
      } else if (ctok == "in") {
        c.kind = Kind::Inert;
      } else if (ctok == "rm" || ctok == "rm+" || ctok == "rm-") {
        if (p == 2)
          throw ParseError("dyadic ramified entries are rm:d2 or rm:d3", ctok,
                           cpos);
        c.kind = Kind::Ramified;
        c.delta = 1;
        if (ctok.size() == 3) c.tag = ctok[2] == '+' ? 1 : -1;
      } else if (ctok == "rm:d2" || ctok == "rm:d3") {
        if (p != 2)
          throw ParseError("rm:dN entries are dyadic only", ctok, cpos);
        c.kind = Kind::Ramified;
        c.delta = ctok[4] - '0';
      } else {
        throw ParseError("unknown class", ctok, cpos);
      }
      s.finite[p] = c;
    }
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  return s;
}

std::string format_stuple(const STuple& s) {
  std::string out = s.arch == ArchKind::CC ? "inf=C" : "inf=R";
  for (auto& [p, c] : s.finite) {
    out += ';';
    out += std::to_string(p);
    out += '=';
    switch (c.kind) {
      case Kind::Split:
        out += "sp";
        break;
      case Kind::Inert:
        out += "in";
        break;
      case Kind::Ramified:
        if (p == 2) {
          out += "rm:d";
          out += static_cast<char>('0' + c.delta);
        } else {
          out += "rm";
          if (c.tag) out += *c.tag == 1 ? "+" : "-";
        }
        break;
    }
  }
  return out;
}

namespace {

QuadClass twist_class(const QuadClass& c, i64 p, i64 m) {
  QuadClass t;
  if (m % p != 0) {
    if (p == 2) {
      i64 m8 = mod8(m);  // 1 or 5
      if (c.kind != Kind::Ramified) {
        t.kind = m8 == 1 ? c.kind
                         : (c.kind == Kind::Split ? Kind::Inert : Kind::Split);
        return t;
      }
      t.kind = Kind::Ramified;
      t.delta = c.delta;
      if (c.tag) t.tag = static_cast<int>(mod8(*c.tag * m8));
      return t;
    }
    int chi = kronecker(m, p);
    if (c.kind != Kind::Ramified) {
      t.kind = chi == 1 ? c.kind
                        : (c.kind == Kind::Split ? Kind::Inert : Kind::Split);
      return t;
    }
    t.kind = Kind::Ramified;
    t.delta = c.delta;
    if (c.tag) t.tag = chi * *c.tag;
    return t;
  }
  // p | m: m is odd and squarefree, so p is odd and delta(m at p) = 1
  int tag_m = kronecker(m / p, p);
  if (c.kind == Kind::Split) {
    t.kind = Kind::Ramified;
    t.delta = 1;
    t.tag = tag_m;
    return t;
  }
  if (c.kind == Kind::Inert) {
    t.kind = Kind::Ramified;
    t.delta = 1;
    t.tag = -tag_m;
    return t;
  }
  if (!c.tag)
    throw std::invalid_argument(
        "twist of a wildcard ramified class at p | m is ambiguous");
  t.kind = *c.tag == tag_m ? Kind::Split : Kind::Inert;
  return t;
}

}  // namespace

STuple twist_stuple(const STuple& s, i64 m) {
  if (m == 1 || !is_fundamental(m) || mod4(m) != 1)
    throw std::invalid_argument(
        "twisting discriminant must be fundamental, 1 mod 4 and not 1");
  for (i64 p : prime_factors(m))
    if (!s.finite.count(p))
      throw std::invalid_argument(
          "every prime dividing the twisting discriminant needs an entry");
  STuple t;
  t.arch = m > 0 ? s.arch
                 : (s.arch == ArchKind::CC ? ArchKind::RR : ArchKind::CC);
  for (auto& [p, c] : s.finite) t.finite[p] = twist_class(c, p, m);
  return t;
}

}  // namespace qm
