#include "spin7/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace spin7 {

FlatCayleyDomain::FlatCayleyDomain(std::array<int, 4> counts,
                                   std::array<double, 4> len, bool torus)
    : n(counts), length(len), periodic4(torus) {
  for (int i = 0; i < 4; ++i) {
    if (n[i] < 4) throw std::invalid_argument("FlatCayleyDomain: grid too small");
    if (length[i] <= 0) throw std::invalid_argument("FlatCayleyDomain: bad length");
  }
}

std::array<int, 4> FlatCayleyDomain::coords(std::int64_t id) const {
  std::array<int, 4> c;
  c[0] = (int)(id % n[0]);
  id /= n[0];
  c[1] = (int)(id % n[1]);
  id /= n[1];
  c[2] = (int)(id % n[2]);
  c[3] = (int)(id / n[2]);
  return c;
}

std::array<double, 4> FlatCayleyDomain::position(std::int64_t id) const {
  std::array<int, 4> c = coords(id);
  return {c[0] * h(0), c[1] * h(1), c[2] * h(2), c[3] * h(3)};
}

double NodeField::max_abs() const {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void BCSpec::validate() const {
  if (k < 0 || k > 4) throw std::invalid_argument("BCSpec: k out of range");
  for (int c = 0; c < 4; ++c)
    for (int d = c; d < 4; ++d) {
      double s = 0;
      for (int r = 0; r < 4; ++r) s += rot[r][c] * rot[r][d];
      if (std::abs(s - (c == d ? 1.0 : 0.0)) > 1e-10)
        throw std::invalid_argument("BCSpec: rotation not orthogonal");
    }
}

std::array<double, 4> BCSpec::column(int c) const {
  return {rot[0][c], rot[1][c], rot[2][c], rot[3][c]};
}

}  // namespace spin7
