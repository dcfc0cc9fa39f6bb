#pragma once

#include <string>

#include "supinf/mesh.hpp"

namespace supinf {

// Plain-text field dump: header line
//   # supinf-field dim=<d> cells=<c> components=<N>
// (cells is <cx>x<cy> in 2d), then one line per node with N
// whitespace-separated values in row-major node order, 17 significant
// digits so reload round-trips exactly.
void write_field(const std::string& path, const Field& field, const Mesh& mesh);

struct FieldFileHeader {
  int dim = 1;
  std::array<int, 2> cells{0, 0};
  int components = 1;
};

// Throws std::runtime_error on malformed files.
Field read_field(const std::string& path, FieldFileHeader* header = nullptr);

// Reads a field and checks its header against the mesh.
Field read_field_for_mesh(const std::string& path, const Mesh& mesh);

}  // namespace supinf
