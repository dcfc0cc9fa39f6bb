#include "supinf/field_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace supinf {

void write_field(const std::string& path, const Field& field, const Mesh& mesh) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_field: cannot open " + path);
  if (mesh.dim == 1)
    std::fprintf(fp, "# supinf-field dim=1 cells=%d components=%d\n", mesh.cells[0],
                 field.components);
  else
    std::fprintf(fp, "# supinf-field dim=2 cells=%dx%d components=%d\n", mesh.cells[0],
                 mesh.cells[1], field.components);
  const int N = field.components;
  for (int node = 0; node < mesh.node_count(); ++node) {
    for (int c = 0; c < N; ++c)
      std::fprintf(fp, "%.17g%s", field.at(node, c), c + 1 == N ? "" : " ");
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

Field read_field(const std::string& path, FieldFileHeader* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_field: empty file " + path);

  FieldFileHeader hdr;
  char cellspec[64] = {0};
  if (std::sscanf(line.c_str(), "# supinf-field dim=%d cells=%63s components=%d", &hdr.dim,
                  cellspec, &hdr.components) != 3)
    throw std::runtime_error("read_field: bad header in " + path);
  if (hdr.dim == 1) {
    if (std::sscanf(cellspec, "%d", &hdr.cells[0]) != 1)
      throw std::runtime_error("read_field: bad cells in " + path);
  } else if (hdr.dim == 2) {
    if (std::sscanf(cellspec, "%dx%d", &hdr.cells[0], &hdr.cells[1]) != 2)
      throw std::runtime_error("read_field: bad cells in " + path);
  } else {
    throw std::runtime_error("read_field: bad dim in " + path);
  }

  const long node_count = hdr.dim == 1 ? hdr.cells[0] + 1
                                       : static_cast<long>(hdr.cells[0] + 1) * (hdr.cells[1] + 1);
  Field f;
  f.components = hdr.components;
  f.values.reserve(static_cast<std::size_t>(node_count) * hdr.components);
  double v;
  while (in >> v) f.values.push_back(v);
  if (f.values.size() != static_cast<std::size_t>(node_count) * hdr.components)
    throw std::runtime_error("read_field: value count does not match header in " + path);
  if (header) *header = hdr;
  return f;
}

Field read_field_for_mesh(const std::string& path, const Mesh& mesh) {
  FieldFileHeader hdr;
  Field f = read_field(path, &hdr);
  if (hdr.dim != mesh.dim || hdr.cells[0] != mesh.cells[0] ||
      (mesh.dim == 2 && hdr.cells[1] != mesh.cells[1]))
    throw std::runtime_error("read_field: field file was dumped on a different mesh");
  validate_field(f, mesh);
  return f;
}

}  // namespace supinf
