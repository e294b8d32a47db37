#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qm {

using i64 = long long;

// Splitting behaviour of one finite place in a quadratic etale algebra.
enum class Kind { Split, Inert, Ramified };

// Behaviour of the infinite place: R x R or the complex field.
enum class ArchKind { RR, CC };

enum class SplitType { sp, in, rm };

// Class of a quadratic etale algebra over Q_p.
//
// delta is the exponent of the relative discriminant: 0 for Split/Inert,
// 1 for Ramified at odd p, and 2 or 3 at p = 2.
//
// tag refines the ramified classes.  At odd p it is +1 or -1, the
// quadratic-residue class modulo p of the prime-to-p part of the
// discriminant.  At p = 2 it is d/4 mod 8 (delta = 2, values 3 or 7) or
// d/8 mod 8 (delta = 3, values 1, 3, 5, 7).  An empty tag in an S-tuple
// entry acts as a wildcard on that refinement.
struct QuadClass {
  Kind kind = Kind::Split;
  int delta = 0;
  std::optional<int> tag;

  bool operator==(const QuadClass&) const = default;
};

// Finite set of local conditions: one archimedean class plus conditions at
// finitely many primes.  The map keeps primes sorted, which fixes the
// iteration order everywhere downstream.
struct STuple {
  ArchKind arch = ArchKind::CC;
  std::map<i64, QuadClass> finite;

  bool operator==(const STuple&) const = default;
};

struct ParseError : std::runtime_error {
  std::string token;
  std::size_t position;
  ParseError(std::string msg, std::string tok, std::size_t pos)
      : std::runtime_error(std::move(msg)), token(std::move(tok)), position(pos) {}
};

// Kronecker symbol (a|n) for arbitrary integers, n != 0.
int kronecker(i64 a, i64 n);

bool is_squarefree(i64 x);
bool is_fundamental(i64 d);

// Number of places of the tuple at which the local algebra is a field.
int field_place_count(const STuple& s);

// Local class of the field of discriminant d at p.  d must be fundamental.
QuadClass local_class(i64 d, i64 p);

// True iff the field of discriminant d satisfies every condition in s.
bool matches(i64 d, const STuple& s);

// Fundamental discriminant of Q(sqrt(d*m)).  Rejects d == m.
i64 dual_disc(i64 d, i64 m);

SplitType splitting_in_ktilde(i64 p, i64 m);

// Number of quadratic extensions of a local field with residue size q and
// ramification index bound m_v having discriminant exponent delta.
// delta = 2l with 1 <= l <= m_v gives 2q^(l-1)(q-1); delta = 2m_v+1 gives
// 2q^(m_v).  Other delta are rejected.
i64 count_ramified_classes(i64 q, int delta, int m_v);

// S-tuple text grammar: "inf=C|R" then ";<p>=sp|in|rm[+|-]|rm:d2|rm:d3".
STuple parse_stuple(const std::string& text);
std::string format_stuple(const STuple& s);

// Tuple-level twist by the fundamental discriminant m: the class of F* at
// each place of s, where F* = Q(sqrt(d*m)).  Requires every prime dividing
// m to carry an entry in s, with an explicit tag where p | m is ramified
// in s (the twist of a wildcard ramified class at p | m is ambiguous).
// m must have no dyadic ramification (m = 1 mod 4).
STuple twist_stuple(const STuple& s, i64 m);

}  // namespace qm
