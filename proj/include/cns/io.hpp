// Field and table output.
//
// Binary field format: a single line of JSON ending in '\n' with keys
// {"nx", "ny", "Lx", "Ymax", "time", "name"}, followed by nx*ny little-endian
// float64 values, row-major with x fastest (row j holds y = y_j). The y nodes
// themselves live in a "grid.json" sidecar written once per output directory.

#ifndef CNS_IO_HPP
#define CNS_IO_HPP

#include <string>
#include <vector>

#include "cns/grid.hpp"

namespace cns {

void dump_field(const std::string& path, const ScalarField2D& f, const std::string& name);

struct LoadedField {
  ScalarField2D field;
  std::string name;
};

/** Reads a field written by dump_field. The y nodes are reconstructed from
 * the grid.json sidecar next to `path`; without one a uniform grid matching
 * the header is assumed. */
LoadedField load_field(const std::string& path);

/** Writes {"Lx":..., "Ymax":..., "nx":..., "ny":..., "y_nodes":[...]} so that
 * dumped fields can be read back onto the exact mesh. */
void write_grid_sidecar(const std::string& dir, const Grid2D& g);

/** Appends rows of doubles under a one-line header; creates the file with the
 * header when it does not exist yet. */
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  size_t ncols_;
};

void ensure_directory(const std::string& dir);

}  // namespace cns

#endif  // CNS_IO_HPP
