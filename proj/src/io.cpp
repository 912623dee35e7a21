#include "cns/io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cns {
namespace {

using nlohmann::json;

static_assert(sizeof(double) == 8, "binary field format requires 8-byte doubles");

bool host_is_little_endian() {
  const uint16_t probe = 1;
  uint8_t b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}

void write_doubles_le(std::ostream& os, const std::vector<double>& v) {
  if (host_is_little_endian()) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    return;
  }
  for (double x : v) {
    uint64_t bits;
    std::memcpy(&bits, &x, 8);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    os.write(buf, 8);
  }
}

void read_doubles_le(std::istream& is, std::vector<double>& v) {
  if (host_is_little_endian()) {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
  } else {
    for (double& x : v) {
      char buf[8];
      is.read(buf, 8);
      uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(static_cast<uint8_t>(buf[i])) << (8 * i);
      std::memcpy(&x, &bits, 8);
    }
  }
  if (!is) throw std::runtime_error("field file truncated");
}

}  // namespace

void dump_field(const std::string& path, const ScalarField2D& f, const std::string& name) {
  const Grid2D& g = *f.grid;
  json hdr = {{"nx", g.Nx}, {"ny", g.Ny},   {"Lx", g.Lx},
              {"Ymax", g.Ymax}, {"time", f.time}, {"name", name}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << hdr.dump() << '\n';
  write_doubles_le(os, f.v);
  if (!os) throw std::runtime_error("write failed: " + path);
}

LoadedField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing header line: " + path);
  json hdr = json::parse(line);
  const int nx = hdr.at("nx").get<int>();
  const int ny = hdr.at("ny").get<int>();
  const double Lx = hdr.at("Lx").get<double>();
  const double Ymax = hdr.at("Ymax").get<double>();

  std::shared_ptr<const Grid2D> grid;
  const auto sidecar = std::filesystem::path(path).parent_path() / "grid.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream gs(sidecar);
    json gj = json::parse(gs);
    auto y = gj.at("y_nodes").get<std::vector<double>>();
    if (static_cast<int>(y.size()) == ny && gj.at("nx").get<int>() == nx)
      grid = std::make_shared<Grid2D>(Lx, nx, Ymax, std::move(y));
  }
  if (!grid) grid = make_uniform_grid(Lx, nx, Ymax, ny);

  LoadedField out{ScalarField2D(grid), hdr.value("name", std::string{})};
  out.field.time = hdr.value("time", 0.0);
  read_doubles_le(is, out.field.v);
  return out;
}

void write_grid_sidecar(const std::string& dir, const Grid2D& g) {
  ensure_directory(dir);
  json gj = {{"Lx", g.Lx}, {"Ymax", g.Ymax}, {"nx", g.Nx}, {"ny", g.Ny}, {"y_nodes", g.y}};
  std::ofstream os(std::filesystem::path(dir) / "grid.json");
  if (!os) throw std::runtime_error("cannot write grid sidecar in " + dir);
  os << gj.dump(2) << '\n';
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), ncols_(columns.size()) {
  if (std::filesystem::exists(path_)) return;
  const auto parent = std::filesystem::path(path_).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path_);
  if (!os) throw std::runtime_error("cannot open for writing: " + path_);
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_)
    throw std::invalid_argument("CsvWriter: row width mismatch in " + path_);
  std::ostringstream line;
  line.precision(17);
  for (size_t i = 0; i < values.size(); ++i) line << (i ? "," : "") << values[i];
  std::ofstream os(path_, std::ios::app);
  os << line.str() << '\n';
  if (!os) throw std::runtime_error("append failed: " + path_);
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

}  // namespace cns
