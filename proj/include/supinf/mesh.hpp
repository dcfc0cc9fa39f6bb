#pragma once

#include <array>
#include <span>
#include <vector>

namespace supinf {

// Uniform tensor-product grid over a box with midpoint quadrature, one
// point per cell. Fields are nodal, piecewise (bi)linear, with zero
// boundary trace. In 1d the per-cell gradient of a linear field is
// constant, so the midpoint rule integrates gradient densities exactly.
struct Mesh {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> cells{2, 1};
  std::array<double, 2> h{0.5, 0.0};

  int cell_count() const { return dim == 1 ? cells[0] : cells[0] * cells[1]; }
  int quad_count() const { return cell_count(); }
  int nodes_x() const { return cells[0] + 1; }
  int nodes_y() const { return dim == 2 ? cells[1] + 1 : 1; }
  int node_count() const { return nodes_x() * nodes_y(); }
  int node_of(int ix, int iy = 0) const { return iy * nodes_x() + ix; }
  double measure() const;
  double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }
  double quad_weight(int q) const { (void)q; return cell_volume(); }
  std::array<double, 2> quad_point(int q) const;
  std::array<int, 2> cell_coords(int q) const;
  bool is_boundary_node(int node) const;
};

// extent = {xlo, xhi} in 1d, {xlo, xhi, ylo, yhi} in 2d; cells per axis.
// Throws std::invalid_argument on dim outside {1,2}, cells < 2, or a
// degenerate extent.
Mesh build_mesh(int dim, std::span<const double> extent, std::span<const int> cells);

// Nodal values of an R^N-valued map, node-major storage.
struct Field {
  int components = 1;
  std::vector<double> values;

  double& at(int node, int c) { return values[static_cast<std::size_t>(node) * components + c]; }
  double at(int node, int c) const { return values[static_cast<std::size_t>(node) * components + c]; }
};

Field zero_field(const Mesh& mesh, int components = 1);

// Throws if the shape mismatches the mesh, any entry is non-finite, or a
// boundary node carries a nonzero value.
void validate_field(const Field& field, const Mesh& mesh);

void zero_boundary(Field& field, const Mesh& mesh);

// Indices of interior nodes, in node order.
std::vector<int> interior_nodes(const Mesh& mesh);

// (u, Du) at the quadrature points. du is stored as du[(q*N + c)*dim + a].
struct Samples {
  int n_q = 0;
  int components = 1;
  int dim = 1;
  std::vector<double> u;
  std::vector<double> du;
};

void sample_into(const Field& field, const Mesh& mesh, Samples& out);
Samples sample(const Field& field, const Mesh& mesh);

// Adjoint of sampling: accumulates per-quadrature-point cotangents into
// nodal slots. coef_u (length N, may be null) multiplies the value
// interpolation weights; coef_du (length N*dim, may be null) multiplies
// the gradient stencil. All gradient assemblies go through this.
void scatter_quad(const Mesh& mesh, int q, const double* coef_u, const double* coef_du,
                  Field& out);

}  // namespace supinf
