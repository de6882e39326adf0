#include "harmgrad/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace harmgrad {

namespace {

template <class T>
T interpolate_impl(const GridField<T>& f, cplx z) {
  const double h = f.spacing();
  const double gx = (z.real() - f.origin().real()) / h;
  const double gy = (z.imag() - f.origin().imag()) / h;
  const auto nx = static_cast<double>(f.nx());
  const auto ny = static_cast<double>(f.ny());
  const double cx = std::clamp(gx, 0.0, nx - 1.0);
  const double cy = std::clamp(gy, 0.0, ny - 1.0);
  auto i0 = static_cast<std::size_t>(std::floor(cx));
  auto j0 = static_cast<std::size_t>(std::floor(cy));
  if (f.nx() > 1) i0 = std::min(i0, f.nx() - 2);
  if (f.ny() > 1) j0 = std::min(j0, f.ny() - 2);
  const std::size_t i1 = std::min(i0 + 1, f.nx() - 1);
  const std::size_t j1 = std::min(j0 + 1, f.ny() - 1);
  const double tx = cx - static_cast<double>(i0);
  const double ty = cy - static_cast<double>(j0);
  return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i1, j0) +
         (1 - tx) * ty * f(i0, j1) + tx * ty * f(i1, j1);
}

void put_le(std::ostream& os, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  os.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

double get_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

double max_abs(const ComplexGridField& f) {
  double m = 0.0;
  for (const cplx& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const ComplexGridField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double l2_norm(const ComplexGridField& f) {
  double s = 0.0;
  for (const cplx& v : f.values()) s += std::norm(v);
  return std::sqrt(s) * f.spacing();
}

cplx interpolate(const ComplexGridField& f, cplx z) { return interpolate_impl(f, z); }
double interpolate(const RealGridField& f, cplx z) { return interpolate_impl(f, z); }

void write_grid(const ComplexGridField& f, const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  auto hdr = stem;
  hdr += ".json";
  std::ofstream os(bin, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidInput, "cannot open " + bin.string());
  for (const cplx& v : f.values()) {
    put_le(os, v.real());
    put_le(os, v.imag());
  }
  nlohmann::json j;
  j["origin"] = {f.origin().real(), f.origin().imag()};
  j["h"] = f.spacing();
  j["nx"] = f.nx();
  j["ny"] = f.ny();
  j["layout"] = "row-major i*ny+j, little-endian float64 (re, im)";
  std::ofstream(hdr) << j.dump(2) << '\n';
}

ComplexGridField read_grid(const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  auto hdr = stem;
  hdr += ".json";
  std::ifstream hs(hdr);
  if (!hs) throw Error(ErrorKind::InvalidInput, "cannot open " + hdr.string());
  const auto j = nlohmann::json::parse(hs);
  const cplx origin(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>());
  const double h = j.at("h").get<double>();
  const auto nx = j.at("nx").get<std::size_t>();
  const auto ny = j.at("ny").get<std::size_t>();
  std::ifstream is(bin, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidInput, "cannot open " + bin.string());
  std::vector<cplx> values(nx * ny);
  for (auto& v : values) {
    const double re = get_le(is);
    const double im = get_le(is);
    v = cplx(re, im);
  }
  if (!is) throw Error(ErrorKind::InvalidInput, "truncated grid file " + bin.string());
  return ComplexGridField(origin, h, nx, ny, std::move(values));
}

}  // namespace harmgrad
