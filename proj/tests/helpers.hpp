#pragma once

#include <cmath>
#include <random>
#include <span>

#include "supinf/mesh.hpp"

namespace testutil {

inline supinf::Mesh interval(int cells, double a = 0.0, double b = 1.0) {
  const double ext[2] = {a, b};
  return supinf::build_mesh(1, ext, std::span<const int>(&cells, 1));
}

inline supinf::Mesh box2d(int cx, int cy) {
  const double ext[4] = {0.0, 1.0, 0.0, 1.0};
  const int cells[2] = {cx, cy};
  return supinf::build_mesh(2, ext, cells);
}

inline supinf::Field random_field(const supinf::Mesh& mesh, int components, double amplitude,
                                  std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  supinf::Field u = supinf::zero_field(mesh, components);
  for (int node = 0; node < mesh.node_count(); ++node)
    if (!mesh.is_boundary_node(node))
      for (int c = 0; c < components; ++c) u.at(node, c) = dist(rng);
  return u;
}

inline supinf::Field nodal_1d(const supinf::Mesh& mesh, double (*fn)(double)) {
  supinf::Field u = supinf::zero_field(mesh, 1);
  for (int i = 1; i < mesh.cells[0]; ++i) u.at(i, 0) = fn(mesh.lo[0] + i * mesh.h[0]);
  return u;
}

inline double parabola(double x) { return x * (1.0 - x); }
inline double hat(double x) { return std::min(x, 1.0 - x); }

}  // namespace testutil
