#include "supinf/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace supinf {

double Mesh::measure() const {
  double m = hi[0] - lo[0];
  if (dim == 2) m *= hi[1] - lo[1];
  return m;
}

std::array<int, 2> Mesh::cell_coords(int q) const {
  if (dim == 1) return {q, 0};
  return {q % cells[0], q / cells[0]};
}

std::array<double, 2> Mesh::quad_point(int q) const {
  const auto c = cell_coords(q);
  std::array<double, 2> x{lo[0] + (c[0] + 0.5) * h[0], 0.0};
  if (dim == 2) x[1] = lo[1] + (c[1] + 0.5) * h[1];
  return x;
}

bool Mesh::is_boundary_node(int node) const {
  const int ix = node % nodes_x();
  if (ix == 0 || ix == cells[0]) return true;
  if (dim == 2) {
    const int iy = node / nodes_x();
    if (iy == 0 || iy == cells[1]) return true;
  }
  return false;
}

Mesh build_mesh(int dim, std::span<const double> extent, std::span<const int> cells) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("build_mesh: dim must be 1 or 2");
  if (extent.size() != static_cast<std::size_t>(2 * dim))
    throw std::invalid_argument("build_mesh: extent needs 2 entries per axis");
  if (cells.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("build_mesh: one cell count per axis");
  Mesh m;
  m.dim = dim;
  for (int a = 0; a < dim; ++a) {
    m.lo[a] = extent[2 * a];
    m.hi[a] = extent[2 * a + 1];
    m.cells[a] = cells[a];
    if (cells[a] < 2)
      throw std::invalid_argument("build_mesh: need at least 2 cells per axis");
    if (!(m.hi[a] > m.lo[a]))
      throw std::invalid_argument("build_mesh: degenerate extent on axis " + std::to_string(a));
    m.h[a] = (m.hi[a] - m.lo[a]) / cells[a];
  }
  if (dim == 1) {
    m.cells[1] = 1;
    m.h[1] = 0.0;
  }
  return m;
}

Field zero_field(const Mesh& mesh, int components) {
  Field f;
  f.components = components;
  f.values.assign(static_cast<std::size_t>(mesh.node_count()) * components, 0.0);
  return f;
}

void validate_field(const Field& field, const Mesh& mesh) {
  const std::size_t expect = static_cast<std::size_t>(mesh.node_count()) * field.components;
  if (field.values.size() != expect)
    throw std::invalid_argument("field: node count does not match mesh");
  for (double v : field.values)
    if (!std::isfinite(v)) throw std::invalid_argument("field: non-finite entry");
  for (int node = 0; node < mesh.node_count(); ++node)
    if (mesh.is_boundary_node(node))
      for (int c = 0; c < field.components; ++c)
        if (field.at(node, c) != 0.0)
          throw std::invalid_argument("field: nonzero boundary value (zero trace required)");
}

void zero_boundary(Field& field, const Mesh& mesh) {
  for (int node = 0; node < mesh.node_count(); ++node)
    if (mesh.is_boundary_node(node))
      for (int c = 0; c < field.components; ++c) field.at(node, c) = 0.0;
}

std::vector<int> interior_nodes(const Mesh& mesh) {
  std::vector<int> idx;
  idx.reserve(mesh.node_count());
  for (int node = 0; node < mesh.node_count(); ++node)
    if (!mesh.is_boundary_node(node)) idx.push_back(node);
  return idx;
}

void sample_into(const Field& field, const Mesh& mesh, Samples& out) {
  const int N = field.components;
  const int nq = mesh.quad_count();
  out.n_q = nq;
  out.components = N;
  out.dim = mesh.dim;
  out.u.assign(static_cast<std::size_t>(nq) * N, 0.0);
  out.du.assign(static_cast<std::size_t>(nq) * N * mesh.dim, 0.0);

  if (mesh.dim == 1) {
    const double invh = 1.0 / mesh.h[0];
    for (int q = 0; q < nq; ++q) {
      const double* a = &field.values[static_cast<std::size_t>(q) * N];
      const double* b = &field.values[static_cast<std::size_t>(q + 1) * N];
      double* u = &out.u[static_cast<std::size_t>(q) * N];
      double* du = &out.du[static_cast<std::size_t>(q) * N];
      for (int c = 0; c < N; ++c) {
        u[c] = 0.5 * (a[c] + b[c]);
        du[c] = (b[c] - a[c]) * invh;
      }
    }
    return;
  }

  const int nx = mesh.nodes_x();
  const double invhx2 = 0.5 / mesh.h[0];
  const double invhy2 = 0.5 / mesh.h[1];
  for (int q = 0; q < nq; ++q) {
    const auto cc = mesh.cell_coords(q);
    const int n00 = mesh.node_of(cc[0], cc[1]);
    const double* v00 = &field.values[static_cast<std::size_t>(n00) * N];
    const double* v10 = &field.values[static_cast<std::size_t>(n00 + 1) * N];
    const double* v01 = &field.values[static_cast<std::size_t>(n00 + nx) * N];
    const double* v11 = &field.values[static_cast<std::size_t>(n00 + nx + 1) * N];
    double* u = &out.u[static_cast<std::size_t>(q) * N];
    double* du = &out.du[static_cast<std::size_t>(q) * N * 2];
    for (int c = 0; c < N; ++c) {
      u[c] = 0.25 * (v00[c] + v10[c] + v01[c] + v11[c]);
      du[2 * c] = (v10[c] + v11[c] - v00[c] - v01[c]) * invhx2;
      du[2 * c + 1] = (v01[c] + v11[c] - v00[c] - v10[c]) * invhy2;
    }
  }
}

Samples sample(const Field& field, const Mesh& mesh) {
  const std::size_t expect = static_cast<std::size_t>(mesh.node_count()) * field.components;
  if (field.values.size() != expect)
    throw std::invalid_argument("sample: field shape does not match mesh");
  Samples s;
  sample_into(field, mesh, s);
  return s;
}

void scatter_quad(const Mesh& mesh, int q, const double* coef_u, const double* coef_du,
                  Field& out) {
  const int N = out.components;
  if (mesh.dim == 1) {
    const double invh = 1.0 / mesh.h[0];
    double* a = &out.values[static_cast<std::size_t>(q) * N];
    double* b = &out.values[static_cast<std::size_t>(q + 1) * N];
    for (int c = 0; c < N; ++c) {
      if (coef_u) {
        a[c] += 0.5 * coef_u[c];
        b[c] += 0.5 * coef_u[c];
      }
      if (coef_du) {
        a[c] -= coef_du[c] * invh;
        b[c] += coef_du[c] * invh;
      }
    }
    return;
  }

  const int nx = mesh.nodes_x();
  const auto cc = mesh.cell_coords(q);
  const int n00 = mesh.node_of(cc[0], cc[1]);
  double* v00 = &out.values[static_cast<std::size_t>(n00) * N];
  double* v10 = &out.values[static_cast<std::size_t>(n00 + 1) * N];
  double* v01 = &out.values[static_cast<std::size_t>(n00 + nx) * N];
  double* v11 = &out.values[static_cast<std::size_t>(n00 + nx + 1) * N];
  const double invhx2 = 0.5 / mesh.h[0];
  const double invhy2 = 0.5 / mesh.h[1];
  for (int c = 0; c < N; ++c) {
    if (coef_u) {
      const double t = 0.25 * coef_u[c];
      v00[c] += t;
      v10[c] += t;
      v01[c] += t;
      v11[c] += t;
    }
    if (coef_du) {
      const double gx = coef_du[2 * c] * invhx2;
      const double gy = coef_du[2 * c + 1] * invhy2;
      v00[c] += -gx - gy;
      v10[c] += gx - gy;
      v01[c] += -gx + gy;
      v11[c] += gx + gy;
    }
  }
}

}  // namespace supinf
