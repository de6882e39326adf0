#include "harmgrad/spectral.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace harmgrad {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftBuffer {
 public:
  FftBuffer(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1), data_(fftw_alloc_complex(n0 * n1)) {
    if (data_ == nullptr) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    const int a = static_cast<int>(n0);
    const int b = static_cast<int>(n1);
    forward_ = fftw_plan_dft_2d(a, b, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(a, b, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  cplx* data() noexcept { return reinterpret_cast<cplx*>(data_); }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  std::size_t n0_;
  std::size_t n1_;
  fftw_complex* data_;
  fftw_plan forward_;
  fftw_plan backward_;
};

enum class Kind { Cauchy, Beurling };

void check_support(const ComplexGridField& f) {
  const std::size_t nx = f.nx();
  const std::size_t ny = f.ny();
  const double floor = kSupportTolerance * max_abs(f);
  auto bad = [&](std::size_t i, std::size_t j) { return std::abs(f(i, j)) > floor; };
  for (std::size_t i = 0; i < nx; ++i) {
    if (bad(i, 0) || bad(i, ny - 1)) throw Error(ErrorKind::UnpaddedSupport, "input is nonzero on the grid border");
  }
  for (std::size_t j = 0; j < ny; ++j) {
    if (bad(0, j) || bad(nx - 1, j)) throw Error(ErrorKind::UnpaddedSupport, "input is nonzero on the grid border");
  }
}

double wrapped_frequency(std::size_t k, std::size_t n, double h) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return (kk < nn / 2.0 ? kk : kk - nn) / (nn * h);
}

// Transforms of the unit-mass Gaussian exp(-|w|^2/s^2) / (pi s^2).
cplx gaussian_cauchy(cplx w, double s) {
  if (w == cplx(0.0, 0.0)) return 0.0;
  const double t = std::norm(w) / (s * s);
  return -std::expm1(-t) / (std::numbers::pi * w);
}

cplx gaussian_beurling(cplx w, double s) {
  if (w == cplx(0.0, 0.0)) return 0.0;
  const double t = std::norm(w) / (s * s);
  const double num = t < 1e-3 ? t * t * (-0.5 + t / 3.0 - t * t / 8.0) : t * std::exp(-t) + std::expm1(-t);
  return num / (std::numbers::pi * w * w);
}

ComplexGridField transform(const ComplexGridField& f, Kind kind, TransformOptions opts) {
  check_support(f);
  const double h = f.spacing();
  const std::size_t nx = f.nx();
  const std::size_t ny = f.ny();
  const std::size_t n0 = kSpectralPadding * nx;
  const std::size_t n1 = kSpectralPadding * ny;
  const cplx origin = f.origin();

  cplx mass(0.0, 0.0);
  for (const cplx& v : f.values()) mass += v;
  mass *= h * h;
  const bool correct = opts.far_field_correction && mass != cplx(0.0, 0.0);
  const double s = static_cast<double>(std::min(nx, ny)) * h / 16.0;
  const cplx centroid = origin + 0.5 * h * cplx(static_cast<double>(nx - 1), static_cast<double>(ny - 1));

  FftBuffer buf(n0, n1);
  cplx* d = buf.data();
  std::memset(static_cast<void*>(d), 0, sizeof(cplx) * n0 * n1);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) d[i * n1 + j] = f(i, j);
  }
  auto position = [&](std::size_t i, std::size_t j) {
    return origin + cplx(static_cast<double>(i) * h, static_cast<double>(j) * h);
  };
  if (correct) {
    // discrete Gaussian of exact unit mass on the periodic box, nearest image
    const double px = static_cast<double>(n0) * h;
    const double py = static_cast<double>(n1) * h;
    std::vector<double> g(n0 * n1);
    double total = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
      for (std::size_t j = 0; j < n1; ++j) {
        cplx w = position(i, j) - centroid;
        w = {w.real() - px * std::round(w.real() / px), w.imag() - py * std::round(w.imag() / py)};
        g[i * n1 + j] = std::exp(-std::norm(w) / (s * s));
        total += g[i * n1 + j];
      }
    }
    const double scale = 1.0 / (total * h * h);
    for (std::size_t k = 0; k < n0 * n1; ++k) d[k] -= mass * (g[k] * scale);
  }

  buf.forward();
  const double inv_n = 1.0 / static_cast<double>(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i) {
    const double x1 = wrapped_frequency(i, n0, h);
    for (std::size_t j = 0; j < n1; ++j) {
      const cplx xi(x1, wrapped_frequency(j, n1, h));
      cplx m;
      if (xi == cplx(0.0, 0.0)) {
        m = kind == Kind::Cauchy ? cplx(0.0, 0.0) : cplx(1.0, 0.0);
      } else {
        m = kind == Kind::Cauchy ? 1.0 / (cplx(0.0, std::numbers::pi) * xi) : std::conj(xi) / xi;
      }
      d[i * n1 + j] *= m * inv_n;
    }
  }
  buf.backward();

  const std::size_t ox = opts.padded_output ? n0 : nx;
  const std::size_t oy = opts.padded_output ? n1 : ny;
  ComplexGridField out(origin, h, ox, oy);
  for (std::size_t i = 0; i < ox; ++i) {
    for (std::size_t j = 0; j < oy; ++j) {
      cplx v = d[i * n1 + j];
      if (correct) {
        const cplx w = position(i, j) - centroid;
        v += mass * (kind == Kind::Cauchy ? gaussian_cauchy(w, s) : gaussian_beurling(w, s));
      }
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace

ComplexGridField cauchy_transform(const ComplexGridField& f, TransformOptions opts) {
  return transform(f, Kind::Cauchy, opts);
}

ComplexGridField beurling_transform(const ComplexGridField& f, TransformOptions opts) {
  return transform(f, Kind::Beurling, opts);
}

namespace {

// (d/dx, d/dy) by central differences, one-sided on the border
std::pair<cplx, cplx> gradient_at(const ComplexGridField& f, std::size_t i, std::size_t j) {
  const double h = f.spacing();
  auto diff = [h](const cplx& lo, const cplx& hi, double span) { return (hi - lo) / (span * h); };
  const std::size_t nx = f.nx();
  const std::size_t ny = f.ny();
  cplx dx(0.0, 0.0);
  cplx dy(0.0, 0.0);
  if (nx > 1) {
    if (i == 0) dx = diff(f(0, j), f(1, j), 1.0);
    else if (i + 1 == nx) dx = diff(f(i - 1, j), f(i, j), 1.0);
    else dx = diff(f(i - 1, j), f(i + 1, j), 2.0);
  }
  if (ny > 1) {
    if (j == 0) dy = diff(f(i, 0), f(i, 1), 1.0);
    else if (j + 1 == ny) dy = diff(f(i, j - 1), f(i, j), 1.0);
    else dy = diff(f(i, j - 1), f(i, j + 1), 2.0);
  }
  return {dx, dy};
}

}  // namespace

ComplexGridField dz_fd(const ComplexGridField& f) {
  ComplexGridField out = f.like<cplx>();
  for (std::size_t i = 0; i < f.nx(); ++i) {
    for (std::size_t j = 0; j < f.ny(); ++j) {
      const auto [dx, dy] = gradient_at(f, i, j);
      out(i, j) = 0.5 * (dx - cplx(0.0, 1.0) * dy);
    }
  }
  return out;
}

ComplexGridField dzbar_fd(const ComplexGridField& f) {
  ComplexGridField out = f.like<cplx>();
  for (std::size_t i = 0; i < f.nx(); ++i) {
    for (std::size_t j = 0; j < f.ny(); ++j) {
      const auto [dx, dy] = gradient_at(f, i, j);
      out(i, j) = 0.5 * (dx + cplx(0.0, 1.0) * dy);
    }
  }
  return out;
}

ComplexGridField pad_to_box(const ComplexGridField& f) {
  ComplexGridField out(f.origin(), f.spacing(), kSpectralPadding * f.nx(), kSpectralPadding * f.ny());
  for (std::size_t i = 0; i < f.nx(); ++i)
    for (std::size_t j = 0; j < f.ny(); ++j) out(i, j) = f(i, j);
  return out;
}

}  // namespace harmgrad
