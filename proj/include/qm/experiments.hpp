#pragma once

#include <string>
#include <vector>

#include "qm/density.hpp"
#include "qm/localdata.hpp"
#include "qm/quadfields.hpp"

namespace qm {

struct ExperimentRow {
  i64 cutoff = 0;
  i64 field_count = 0;
  Real empirical;
  Real prediction;
  Real rel_err;
};

struct ExperimentReport {
  std::string kind;
  std::string stuple;
  i64 m = 0;  // twisting discriminant where applicable
  std::vector<ExperimentRow> rows;
  ProductEstimate prediction;
  std::string csv() const;
};

struct RunOptions {
  i64 prime_bound = 100000;
  bool conjectural = false;
  HRCache* cache = nullptr;
  // Enumeration guards: refuse cutoffs above these unless overridden
  // (the real-quadratic regulator walk is the slow one).
  i64 imag_cutoff_guard = 10000000;
  i64 real_cutoff_guard = 100000;
  bool override_guard = false;
};

// Average of (hR)^2 over fundamental discriminants matching s, |d| <= X,
// for each cutoff, against the local-density prediction.
ExperimentReport mean_square_run(const STuple& s, std::vector<i64> cutoffs,
                                 const RunOptions& opt);

// Normalized correlation of hR(d) with hR(d*) over the twisted family.
ExperimentReport correlation_run(const STuple& s, i64 m,
                                 std::vector<i64> cutoffs,
                                 const RunOptions& opt);

// Unnormalized inner product sum hR(d) hR(d*) / X^2.
ExperimentReport inner_product_run(const STuple& s, i64 m,
                                   std::vector<i64> cutoffs,
                                   const RunOptions& opt);

struct TwistCheckRow {
  i64 d = 0;
  i64 dstar = 0;
  i64 expected_abs = 0;  // Delta * |d| scaled as exact rational when integral
  bool ok = false;
};

struct TwistCheckReport {
  i64 m = 0;
  std::string stuple;
  i64 checked = 0;
  i64 failures = 0;
  std::vector<TwistCheckRow> sample;
  std::string csv() const;
};

// Verify |disc(twist)| = Delta_{L_S} * |d| over all matching d up to X,
// and that the twisted discriminant's local data matches twist_stuple(s).
TwistCheckReport verify_disc_twist(const STuple& s, i64 m, i64 X,
                                   const RunOptions& opt);

}  // namespace qm
