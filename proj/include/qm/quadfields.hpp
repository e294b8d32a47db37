#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qm/localdata.hpp"

namespace qm {

struct FieldRecord {
  i64 d = 0;
  i64 h = 0;
  double R = 1.0;
  i64 abs_norm_disc() const { return d < 0 ? -d : d; }
};

// Class numbers of all fundamental d < 0 with |d| <= X, by one pass over
// the reduced forms of discriminant down to -X.
struct ImagSieve {
  i64 X = 0;
  std::vector<std::uint16_t> h;  // indexed by |d|
  std::vector<bool> fundamental;
  i64 get(i64 d) const;  // rejects d >= 0, |d| > X and nonfundamental d
};

std::vector<i64> enumerate_discs(i64 X, const STuple& s);

i64 class_number_imag_forms(i64 d);
ImagSieve sieve_class_numbers_imag(i64 X);

// h for d < -4 from the exact character sum
// sum_{0 < a < |d|/2} chi_d(a) / (2 - chi_d(2)); 1 for d = -3, -4.
i64 class_number_imag_analytic(i64 d);

// Regulator log(eps_d) of the field of fundamental discriminant d > 0 from
// the continued fraction of (P0 + sqrt(d))/2, absolute error <= 1e-10.
double regulator_real(i64 d);

// Fundamental unit (x + y sqrt(d))/2 reconstructed exactly over the
// continued-fraction period; x^2 - d y^2 = +-4.
struct PellUnit {
  boost::multiprecision::cpp_int x, y;
  int norm = 1;  // (x^2 - d y^2)/4
};
PellUnit fundamental_unit_exact(i64 d);

// L(1, chi_d) by the finite character-sum formulas, certified absolute
// error below target_abs_err (written into *abs_err if given).
double l_one_chi(i64 d, double target_abs_err, double* abs_err = nullptr);

class HRCache {
 public:
  HRCache() = default;
  explicit HRCache(std::string path);  // loads if the file exists
  bool get(i64 d, FieldRecord* out) const;
  void put(const FieldRecord& rec);
  void flush() const;  // atomic rewrite, records ordered by |d|
  const std::string& path() const { return path_; }
  std::size_t size() const { return map_.size(); }

 private:
  std::string path_;
  std::map<i64, FieldRecord> map_;  // keyed by signed d
};

// Class number and regulator of the field of discriminant d.  Imaginary h
// comes from form counting; real h from the analytic formula anchored at
// the continued-fraction regulator, guarded by the rounding residual.
FieldRecord hR(i64 d, HRCache* cache = nullptr);

}  // namespace qm
