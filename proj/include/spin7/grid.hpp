#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spin7/forms.hpp"

namespace spin7 {

// Discretized flat Cayley domain T^3 x [0, L4]: directions 1..3 are periodic
// with n[i] nodes, direction 4 has n[3]+1 node planes. Nodes are ordered with
// the interval direction slowest, so each boundary component is contiguous.
struct FlatCayleyDomain {
  std::array<int, 4> n{8, 8, 8, 8};
  std::array<double, 4> length{1.0, 1.0, 1.0, 1.0};
  bool periodic4 = false;  // all-periodic T^4 variant (no boundary)

  FlatCayleyDomain() = default;
  FlatCayleyDomain(std::array<int, 4> counts, std::array<double, 4> len,
                   bool torus = false);

  double h(int i) const { return length[i] / n[i]; }
  std::int64_t plane_nodes() const {
    return (std::int64_t)n[0] * n[1] * n[2];
  }
  int num_planes() const { return periodic4 ? n[3] : n[3] + 1; }
  std::int64_t num_nodes() const { return plane_nodes() * num_planes(); }

  std::int64_t node(int i1, int i2, int i3, int i4) const {
    return ((std::int64_t)i4 * n[2] + i3) * n[1] * n[0] + (std::int64_t)i2 * n[0] + i1;
  }
  std::array<int, 4> coords(std::int64_t node) const;
  std::array<double, 4> position(std::int64_t node) const;

  bool on_boundary(int i4) const {
    return !periodic4 && (i4 == 0 || i4 == n[3]);
  }
  std::int64_t boundary_nodes() const { return periodic4 ? 0 : 2 * plane_nodes(); }
};

// Four real components per node (normal fields and E-valued fields share the
// layout).
struct NodeField {
  std::int64_t nodes = 0;
  std::vector<double> v;  // 4 * nodes, component-major per node

  NodeField() = default;
  explicit NodeField(std::int64_t n) : nodes(n), v(4 * n, 0.0) {}
  double& at(std::int64_t node, int comp) { return v[4 * node + comp]; }
  double at(std::int64_t node, int comp) const { return v[4 * node + comp]; }
  double max_abs() const;
};

using NormalField = NodeField;
using EField = NodeField;

// Boundary-condition specification: dim nu_W(dX) = k; the orthonormal columns
// of rot give the splitting of the normal R^4 (first k columns tangent to the
// scaffold, the rest normal to it).
struct BCSpec {
  int k = 0;
  std::array<std::array<double, 4>, 4> rot{{{1, 0, 0, 0},
                                            {0, 1, 0, 0},
                                            {0, 0, 1, 0},
                                            {0, 0, 0, 1}}};  // rot[row][col]

  void validate() const;  // k range and orthogonality
  // Column c as a vector in normal coordinates.
  std::array<double, 4> column(int c) const;
};

}  // namespace spin7
