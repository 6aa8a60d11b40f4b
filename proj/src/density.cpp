#include "mplace/density.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace mplace {

namespace {

// 2-D real-to-real transform of a row-major nx x ny grid, in place.
void transform(std::vector<double>& grid, int nx, int ny, fftw_r2r_kind kind_x, fftw_r2r_kind kind_y) {
  fftw_plan plan = fftw_plan_r2r_2d(nx, ny, grid.data(), grid.data(), kind_x, kind_y, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

template <typename Fn>
void for_overlaps(const ElectroSystem& sys, const Rect& box, Fn fn) {
  const int ix0 = std::max(0, static_cast<int>(std::floor(box.xl / sys.bin_w)));
  const int iy0 = std::max(0, static_cast<int>(std::floor(box.yl / sys.bin_h)));
  for (int ix = ix0; ix < sys.bins_x && ix * sys.bin_w < box.xh; ++ix) {
    const double ox = std::min(box.xh, (ix + 1) * sys.bin_w) - std::max(box.xl, ix * sys.bin_w);
    if (ox <= 0) continue;
    for (int iy = iy0; iy < sys.bins_y && iy * sys.bin_h < box.yh; ++iy) {
      const double oy = std::min(box.yh, (iy + 1) * sys.bin_h) - std::max(box.yl, iy * sys.bin_h);
      if (oy > 0) fn(sys.at(ix, iy), ox * oy);
    }
  }
}

Rect box_at(Point p, double w, double h) { return Rect{p.x, p.y, p.x + w, p.y + h}; }

// Charge is spread with bin weights g_i = R_i - R_(i+1), where R_k is a smooth step (the cdf of a
// tent) centered on the edge between bins k-1 and k, R_0 = 1 and R_count = 0, so the weights sum to
// one everywhere. A box deposits the integral of the weights over its extent: the energy is then
// continuously differentiable and the force varies inside a bin, which lets a clump sitting inside
// one bin split apart. The two steps next to the chip boundary are two bins wide so the edge bins
// have no flat part where a box would feel no force.
struct Spline {
  double size;
  int count;
  double interior;  ///< half-width of the interior steps, in bins

  // tent cdf and its integral, in units of the half-width
  static double ramp(double t) {
    if (t <= -1) return 0.0;
    if (t <= 0) return 0.5 * (t + 1) * (t + 1);
    if (t < 1) return 1.0 - 0.5 * (1 - t) * (1 - t);
    return 1.0;
  }
  static double ramp_integral(double t) {
    if (t <= -1) return 0.0;
    if (t <= 0) return (t + 1) * (t + 1) * (t + 1) / 6;
    if (t < 1) return t + (1 - t) * (1 - t) * (1 - t) / 6;
    return t;
  }
  double half(int k) const { return (k == 1 || k == count - 1 ? 1.0 : interior) * size; }
  double step(int k, double x) const {
    if (k <= 0) return 1.0;
    if (k >= count) return 0.0;
    return ramp((x - k * size) / half(k));
  }
  // antiderivative of step(k)
  double step_integral(int k, double x) const {
    if (k <= 0) return x;
    if (k >= count) return 0.0;
    const double h = half(k);
    return h * ramp_integral((x - k * size) / h);
  }
  double phi(int i, double x) const { return step(i, x) - step(i + 1, x); }
  double integral(int i, double a, double b) const {
    return step_integral(i, b) - step_integral(i, a) - (step_integral(i + 1, b) - step_integral(i + 1, a));
  }
  /// Bins with nonzero weight on [a, b].
  std::pair<int, int> range(double a, double b) const {
    const int lo = static_cast<int>(std::floor(a / size - 1.0));
    const int hi = static_cast<int>(std::floor(b / size + 1.0));
    return {std::clamp(lo, 0, count - 1), std::clamp(hi, 0, count - 1)};
  }
};

// Step half-width in bins. LUT and FF use one-bin steps, so a two-bin alternation stays visible to
// the field; macros use two-bin steps to cross the empty bins between their columns.
double smoothing(ResourceType r) { return is_macro(r) ? 1.0 : 0.5; }

// Weighted bin list of one axis of a box.
struct AxisWeights {
  int first = 0;
  std::vector<double> w;
};

AxisWeights axis_weights(const Spline& t, double a, double b) {
  auto [lo, hi] = t.range(a, b);
  AxisWeights out{lo, {}};
  for (int i = lo; i <= hi; ++i) out.w.push_back(t.integral(i, a, b));
  return out;
}

void deposit_charge(ElectroSystem& sys, std::vector<double>& grid, const Rect& box) {
  const double hw = smoothing(sys.resource);
  const Spline tx{sys.bin_w, sys.bins_x, hw}, ty{sys.bin_h, sys.bins_y, hw};
  const AxisWeights wx = axis_weights(tx, box.xl, box.xh), wy = axis_weights(ty, box.yl, box.yh);
  for (std::size_t i = 0; i < wx.w.size(); ++i) {
    for (std::size_t j = 0; j < wy.w.size(); ++j)
      grid[sys.at(wx.first + static_cast<int>(i), wy.first + static_cast<int>(j))] += wx.w[i] * wy.w[j];
  }
}

}  // namespace

int choose_bin_count(std::size_t n) {
  int bins = 1;
  while (static_cast<double>(bins) * bins < static_cast<double>(n)) bins *= 2;
  return std::clamp(bins, 16, 512);
}

ElectroSystem make_grid(ResourceType r, int bins_x, int bins_y, double chip_w, double chip_h) {
  if (!std::has_single_bit(static_cast<unsigned>(bins_x)) || !std::has_single_bit(static_cast<unsigned>(bins_y)))
    throw ValidationError("bin counts must be powers of two");
  ElectroSystem sys;
  sys.resource = r;
  sys.bins_x = bins_x;
  sys.bins_y = bins_y;
  sys.bin_w = chip_w / bins_x;
  sys.bin_h = chip_h / bins_y;
  for (auto* g : {&sys.capacity, &sys.charge_capacity, &sys.density, &sys.inst_density, &sys.potential, &sys.field_x, &sys.field_y})
    g->assign(sys.size(), 0.0);
  return sys;
}

ElectroSystem make_system(const FpgaLayout& layout, const Design& design, ResourceType r) {
  std::size_t count = 0;
  double inst_area = 0.0;
  double movable_area = 0.0;
  for (const auto& inst : design.instances) {
    if (inst.resource != r) continue;
    ++count;
    inst_area += inst.area();
    if (!inst.fixed) movable_area += inst.area();
  }
  const int bins = choose_bin_count(count);
  ElectroSystem sys = make_grid(r, bins, bins, layout.grid_w(), layout.grid_h());
  sys.movable_area = movable_area;

  double cap_area = 0.0;
  for (int x : layout.columns_hosting(r)) {
    for (int k = 0; k < layout.sites_in_column(x); ++k) {
      const Rect site = layout.site_rect(SiteId{x, k});
      deposit(sys, sys.capacity, site);
      // macro capacity stays on the column bins so the field draws macros into the columns
      if (is_macro(r)) deposit(sys, sys.charge_capacity, site);
      else deposit_charge(sys, sys.charge_capacity, site);
      cap_area += site.width() * site.height();
    }
  }
  const double slack = cap_area - inst_area;
  if (slack > 0) {
    sys.filler_count = static_cast<int>(std::max<std::size_t>(64, count));
    sys.filler_side = std::sqrt(slack / sys.filler_count);
  }
  return sys;
}

std::vector<Point> seed_fillers(const ElectroSystem& sys, const FpgaLayout& layout, Rng& rng) {
  std::vector<Point> fillers(sys.filler_count);
  for (auto& f : fillers) {
    f.x = rng.uniform(0.0, std::max(0.0, layout.grid_w() - sys.filler_side));
    f.y = rng.uniform(0.0, std::max(0.0, layout.grid_h() - sys.filler_side));
  }
  return fillers;
}

void deposit(ElectroSystem& sys, std::vector<double>& grid, const Rect& box, double weight) {
  for_overlaps(sys, box, [&](std::size_t b, double area) { grid[b] += weight * area; });
}

void bin_density(ElectroSystem& sys, const Design& design, std::span<const Point> positions,
                 std::span<const Point> fillers) {
  std::fill(sys.inst_density.begin(), sys.inst_density.end(), 0.0);
  std::fill(sys.density.begin(), sys.density.end(), 0.0);
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& inst = design.instances[i];
    if (inst.resource != sys.resource) continue;
    const Rect box = box_at(positions[i], inst.width, inst.height);
    deposit(sys, sys.inst_density, box);
    deposit_charge(sys, sys.density, box);
  }
  for (const auto& p : fillers) deposit_charge(sys, sys.density, box_at(p, sys.filler_side, sys.filler_side));
}

void solve_poisson(ElectroSystem& sys) {
  const int nx = sys.bins_x, ny = sys.bins_y;
  const std::size_t n = sys.size();
  std::vector<double> rho(n);
  double mean = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    rho[b] = sys.density[b] - sys.charge_capacity[b];
    mean += rho[b];
  }
  mean /= static_cast<double>(n);
  for (auto& v : rho) v -= mean;

  std::vector<double> coef = rho;
  transform(coef, nx, ny, FFTW_REDFT10, FFTW_REDFT10);

  // eigenvalues of the 5-point Neumann Laplacian
  std::vector<double> lam_x(nx), lam_y(ny), w_x(nx), w_y(ny);
  const double pi = std::numbers::pi;
  for (int u = 0; u < nx; ++u) {
    lam_x[u] = (2 - 2 * std::cos(pi * u / nx)) / (sys.bin_w * sys.bin_w);
    w_x[u] = pi * u / (nx * sys.bin_w);
  }
  for (int v = 0; v < ny; ++v) {
    lam_y[v] = (2 - 2 * std::cos(pi * v / ny)) / (sys.bin_h * sys.bin_h);
    w_y[v] = pi * v / (ny * sys.bin_h);
  }
  const double norm = 4.0 * nx * ny;
  for (int u = 0; u < nx; ++u) {
    for (int v = 0; v < ny; ++v) {
      const double lam = lam_x[u] + lam_y[v];
      auto& c = coef[sys.at(u, v)];
      c = lam > 0 ? c / (lam * norm) : 0.0;
    }
  }

  sys.potential = coef;
  transform(sys.potential, nx, ny, FFTW_REDFT01, FFTW_REDFT01);

  // sine series need the coefficient of frequency j+1 in slot j
  std::vector<double> fx(n, 0.0), fy(n, 0.0);
  for (int u = 0; u + 1 < nx; ++u) {
    for (int v = 0; v < ny; ++v) fx[sys.at(u, v)] = coef[sys.at(u + 1, v)] * w_x[u + 1];
  }
  for (int u = 0; u < nx; ++u) {
    for (int v = 0; v + 1 < ny; ++v) fy[sys.at(u, v)] = coef[sys.at(u, v + 1)] * w_y[v + 1];
  }
  transform(fx, nx, ny, FFTW_RODFT01, FFTW_REDFT01);
  transform(fy, nx, ny, FFTW_REDFT01, FFTW_RODFT01);
  sys.field_x = std::move(fx);
  sys.field_y = std::move(fy);

  double energy = 0.0;
  for (std::size_t b = 0; b < n; ++b) energy += rho[b] * sys.potential[b];
  sys.energy = energy;
}

Point box_gradient(const ElectroSystem& sys, Point pos, double w, double h) {
  // energy is quadratic in the charges, so dE/dx = 2 * sum_b psi_b * d(charge_b)/dx, and shifting
  // a box changes the weight integral of bin i by phi_i(right edge) - phi_i(left edge)
  const double hw = smoothing(sys.resource);
  const Spline tx{sys.bin_w, sys.bins_x, hw}, ty{sys.bin_h, sys.bins_y, hw};
  const Rect box = box_at(pos, w, h);
  const AxisWeights wx = axis_weights(tx, box.xl, box.xh), wy = axis_weights(ty, box.yl, box.yh);
  Point g;
  for (std::size_t i = 0; i < wx.w.size(); ++i) {
    const int ix = wx.first + static_cast<int>(i);
    const double dx = tx.phi(ix, box.xh) - tx.phi(ix, box.xl);
    for (std::size_t j = 0; j < wy.w.size(); ++j) {
      const int iy = wy.first + static_cast<int>(j);
      const double psi = sys.potential[sys.at(ix, iy)];
      g.x += psi * dx * wy.w[j];
      g.y += psi * wx.w[i] * (ty.phi(iy, box.yh) - ty.phi(iy, box.yl));
    }
  }
  g.x *= 2;
  g.y *= 2;
  return g;
}

std::vector<Point> density_gradient(const ElectroSystem& sys, const Design& design, std::span<const Point> positions) {
  std::vector<Point> grad(design.instances.size());
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& inst = design.instances[i];
    if (inst.resource != sys.resource || inst.fixed) continue;
    grad[i] = box_gradient(sys, positions[i], inst.width, inst.height);
  }
  return grad;
}

std::vector<Point> filler_gradient(const ElectroSystem& sys, std::span<const Point> fillers) {
  std::vector<Point> grad(fillers.size());
  for (std::size_t f = 0; f < fillers.size(); ++f)
    grad[f] = box_gradient(sys, fillers[f], sys.filler_side, sys.filler_side);
  return grad;
}

double overflow(const ElectroSystem& sys) {
  if (sys.movable_area <= 0) return 0.0;
  double over = 0.0;
  for (std::size_t b = 0; b < sys.size(); ++b) over += std::max(0.0, sys.inst_density[b] - sys.capacity[b]);
  return over / sys.movable_area;
}

}  // namespace mplace
