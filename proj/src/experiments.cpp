#include "qm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace qm {

namespace {

// Per-place check for a discriminant already known to be fundamental, so
// the enumeration loops never pay for repeated squarefree tests.
bool matches_local(i64 d, const STuple& s) {
  if ((d > 0) != (s.arch == ArchKind::RR)) return false;
  for (const auto& [p, want] : s.finite) {
    QuadClass got = local_class(d, p);
    if (got.kind != want.kind) return false;
    if (want.kind == Kind::Ramified) {
      if (got.delta != want.delta) return false;
      if (want.tag && got.tag != want.tag) return false;
    }
  }
  return true;
}

void check_guard(const STuple& s, i64 xmax, const RunOptions& opt) {
  i64 guard = s.arch == ArchKind::RR ? opt.real_cutoff_guard
                                     : opt.imag_cutoff_guard;
  if (xmax > guard && !opt.override_guard)
    throw std::invalid_argument("cutoff exceeds the enumeration guard");
}

std::string real_str(const Real& v) {
  return v.str(20, std::ios_base::scientific);
}

Real rel_error(const Real& emp, const Real& pred) {
  using boost::multiprecision::abs;
  return abs(emp - pred) / abs(pred);
}

void push_row(ExperimentReport& rep, i64 cutoff, i64 count, Real empirical) {
  ExperimentRow row;
  row.cutoff = cutoff;
  row.field_count = count;
  row.empirical = empirical;
  row.prediction = rep.prediction.value;
  row.rel_err = rel_error(row.empirical, row.prediction);
  rep.rows.push_back(std::move(row));
}

struct Kahan {
  double sum = 0, comp = 0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

std::string ExperimentReport::csv() const {
  std::ostringstream out;
  out << "X,count,empirical,prediction,rel_err\n";
  for (const auto& r : rows)
    out << r.cutoff << ',' << r.field_count << ',' << real_str(r.empirical)
        << ',' << real_str(r.prediction) << ',' << real_str(r.rel_err)
        << '\n';
  return out.str();
}

ExperimentReport mean_square_run(const STuple& s, std::vector<i64> cutoffs,
                                 const RunOptions& opt) {
  if (cutoffs.empty()) throw std::invalid_argument("no cutoffs given");
  std::sort(cutoffs.begin(), cutoffs.end());
  i64 xmax = cutoffs.back();
  check_guard(s, xmax, opt);

  ExperimentReport rep;
  rep.kind = "mean";
  rep.stuple = format_stuple(s);
  rep.prediction = predicted_mean(s, opt.prime_bound, opt.conjectural);

  std::size_t ci = 0;
  i64 count = 0;
  if (s.arch == ArchKind::CC) {
    ImagSieve sieve = sieve_class_numbers_imag(std::max<i64>(xmax, 3));
    i64 sum = 0;
    for (i64 n = 3; n <= xmax; ++n) {
      while (ci < cutoffs.size() && n > cutoffs[ci]) {
        push_row(rep, cutoffs[ci], count,
                 Real(sum) / Real(cutoffs[ci] * cutoffs[ci]));
        ++ci;
      }
      if (!sieve.fundamental[n] || !matches_local(-n, s)) continue;
      i64 h = sieve.h[n];
      sum += h * h;
      ++count;
    }
    for (; ci < cutoffs.size(); ++ci)
      push_row(rep, cutoffs[ci], count,
               Real(sum) / Real(cutoffs[ci] * cutoffs[ci]));
  } else {
    Kahan sum;
    for (i64 n = 3; n <= xmax; ++n) {
      while (ci < cutoffs.size() && n > cutoffs[ci]) {
        push_row(rep, cutoffs[ci], count,
                 Real(sum.sum) / Real(cutoffs[ci] * cutoffs[ci]));
        ++ci;
      }
      if (!matches(n, s)) continue;
      FieldRecord rec = hR(n, opt.cache);
      double v = static_cast<double>(rec.h) * rec.R;
      sum.add(v * v);
      ++count;
    }
    for (; ci < cutoffs.size(); ++ci)
      push_row(rep, cutoffs[ci], count,
               Real(sum.sum) / Real(cutoffs[ci] * cutoffs[ci]));
  }
  return rep;
}

namespace {

ExperimentReport twisted_run(bool inner, const STuple& s, i64 m,
                             std::vector<i64> cutoffs,
                             const RunOptions& opt) {
  if (cutoffs.empty()) throw std::invalid_argument("no cutoffs given");
  ExperimentReport rep;
  rep.kind = inner ? "inner" : "correlation";
  rep.stuple = format_stuple(s);
  rep.m = m;
  rep.prediction = inner ? predicted_inner(m, s, opt.prime_bound)
                         : predicted_correlation(m, s, opt.prime_bound);
  STuple t = twist_stuple(s, m);

  std::sort(cutoffs.begin(), cutoffs.end());
  i64 xmax = cutoffs.back();
  check_guard(s, xmax, opt);

  Rat delta = delta_LS(m, s);
  Int dual_num = Int(xmax) * numerator(delta) + denominator(delta) - 1;
  i64 dual_lim = static_cast<i64>(Int(dual_num / denominator(delta)));

  std::optional<ImagSieve> sieve;
  i64 need = 0;
  if (s.arch == ArchKind::CC) need = xmax;
  if (t.arch == ArchKind::CC) need = std::max(need, dual_lim);
  if (need > 0) sieve = sieve_class_numbers_imag(std::max<i64>(need, 3));

  // h(d) is exact for imaginary d; hR(d) for real d carries the double
  // regulator, forcing the floating accumulators.
  const bool exact = s.arch == ArchKind::CC && t.arch == ArchKind::CC;
  auto side_val = [&](i64 d, i64* h_exact) -> double {
    if (d < 0) {
      i64 h = sieve->h[-d];
      *h_exact = h;
      return static_cast<double>(h);
    }
    FieldRecord rec = hR(d, opt.cache);
    *h_exact = -1;
    return static_cast<double>(rec.h) * rec.R;
  };

  i64 smm_i = 0, sdd_i = 0, smd_i = 0, count = 0;
  Kahan smm, sdd, smd;
  std::size_t ci = 0;
  auto emit = [&](i64 cutoff) {
    Real emp = 0;
    if (count > 0) {
      if (inner) {
        emp = exact ? Real(smd_i) / Real(cutoff * cutoff)
                    : Real(smd.sum) / Real(cutoff * cutoff);
      } else {
        emp = exact ? Real(smd_i) / sqrt(Real(smm_i) * Real(sdd_i))
                    : Real(smd.sum) / sqrt(Real(smm.sum) * Real(sdd.sum));
      }
    }
    push_row(rep, cutoff, count, emp);
  };
  i64 sign = s.arch == ArchKind::RR ? 1 : -1;
  for (i64 n = 3; n <= xmax; ++n) {
    while (ci < cutoffs.size() && n > cutoffs[ci]) emit(cutoffs[ci++]);
    i64 d = sign * n;
    if (d < 0) {
      if (!sieve->fundamental[n] || !matches_local(d, s)) continue;
    } else {
      if (!matches(d, s)) continue;
    }
    if (d == m) continue;
    i64 dstar = dual_disc(d, m);
    i64 h1 = 0, h2 = 0;
    double v1 = side_val(d, &h1);
    double v2 = side_val(dstar, &h2);
    if (exact) {
      smm_i += h1 * h1;
      sdd_i += h2 * h2;
      smd_i += h1 * h2;
    }
    smm.add(v1 * v1);
    sdd.add(v2 * v2);
    smd.add(v1 * v2);
    ++count;
  }
  while (ci < cutoffs.size()) emit(cutoffs[ci++]);
  return rep;
}

}  // namespace

ExperimentReport correlation_run(const STuple& s, i64 m,
                                 std::vector<i64> cutoffs,
                                 const RunOptions& opt) {
  return twisted_run(false, s, m, std::move(cutoffs), opt);
}

ExperimentReport inner_product_run(const STuple& s, i64 m,
                                   std::vector<i64> cutoffs,
                                   const RunOptions& opt) {
  return twisted_run(true, s, m, std::move(cutoffs), opt);
}

std::string TwistCheckReport::csv() const {
  std::ostringstream out;
  out << "d,dstar,expected_abs,ok\n";
  for (const auto& r : sample)
    out << r.d << ',' << r.dstar << ',' << r.expected_abs << ','
        << (r.ok ? 1 : 0) << '\n';
  return out.str();
}

TwistCheckReport verify_disc_twist(const STuple& s, i64 m, i64 X,
                                   const RunOptions& opt) {
  STuple t = twist_stuple(s, m);
  check_guard(s, X, opt);
  Rat delta = delta_LS(m, s);
  Int num = numerator(delta), den = denominator(delta);

  TwistCheckReport rep;
  rep.m = m;
  rep.stuple = format_stuple(s);
  for (i64 d : enumerate_discs(X, s)) {
    if (d == m) continue;  // F = twisting field: the dual degenerates
    i64 dstar = dual_disc(d, m);
    i64 ad = d < 0 ? -d : d;
    i64 adstar = dstar < 0 ? -dstar : dstar;
    Int want_num = Int(ad) * num;
    bool ok = want_num % den == 0;
    i64 expected = ok ? static_cast<i64>(Int(want_num / den)) : -1;
    ok = ok && adstar == expected && matches(dstar, t);
    ++rep.checked;
    if (!ok) ++rep.failures;
    if (rep.sample.size() < 16)
      rep.sample.push_back(TwistCheckRow{d, dstar, expected, ok});
  }
  return rep;
}

}  // namespace qm
