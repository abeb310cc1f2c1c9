#include "vlab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "vlab/types.hpp"

namespace vlab {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}

std::filesystem::path meta_path(const std::filesystem::path& p) { return p.string() + ".meta"; }

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField2D& w, const FieldMeta& meta) {
  std::ofstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("write_field: cannot open " + path.string());
  for (double v : w.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    bits = to_little(bits);
    raw.write(reinterpret_cast<const char*>(&bits), 8);
  }
  std::ofstream m(meta_path(path));
  const GridSpec& g = w.grid();
  m << std::setprecision(17) << "format = " << field_format << '\n'
    << "n_points = " << g.n_points << '\n'
    << "box_length = " << g.box_length << '\n'
    << "origin_x = " << g.origin.x << '\n'
    << "origin_y = " << g.origin.y << '\n'
    << "time = " << meta.time << '\n'
    << "viscosity = " << meta.viscosity << '\n';
}

LoadedField read_field(const std::filesystem::path& path) {
  std::ifstream m(meta_path(path));
  if (!m) throw std::runtime_error("read_field: missing sidecar " + meta_path(path).string());
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(m, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  require(kv["format"] == field_format, "read_field: unsupported format '" + kv["format"] + "'");
  auto num = [&](const std::string& k) {
    require(kv.count(k) == 1, "read_field: sidecar lacks '" + k + "'");
    return std::stod(kv[k]);
  };
  const GridSpec g(static_cast<int>(num("n_points")), num("box_length"),
                   {num("origin_x"), num("origin_y")});
  std::ifstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("read_field: cannot open " + path.string());
  std::vector<double> v(g.size());
  for (double& x : v) {
    std::uint64_t bits = 0;
    raw.read(reinterpret_cast<char*>(&bits), 8);
    bits = to_little(bits);
    std::memcpy(&x, &bits, 8);
  }
  if (!raw) throw std::runtime_error("read_field: truncated data in " + path.string());
  return {ScalarField2D(g, std::move(v)), {num("time"), num("viscosity")}};
}

}  // namespace vlab
