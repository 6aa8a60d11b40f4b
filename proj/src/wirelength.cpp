#include "mplace/wirelength.hpp"

#include <algorithm>
#include <cmath>

namespace mplace {

namespace {

void require_placed(const Design& design, std::span<const Point> positions) {
  if (positions.size() < design.instances.size())
    throw ValidationError("placement covers " + std::to_string(positions.size()) + " of " +
                          std::to_string(design.instances.size()) + " instances");
}

// One axis of one net. Exponents are shifted by the extreme coordinate so they never overflow.
template <bool kGrad, typename Coord, typename Sink>
double wa_axis(std::size_t n, Coord coord, double gamma, Sink sink) {
  double lo = coord(0), hi = coord(0);
  for (std::size_t p = 1; p < n; ++p) {
    lo = std::min(lo, coord(p));
    hi = std::max(hi, coord(p));
  }
  if (hi == lo) return 0.0;
  double sa = 0, na = 0, sb = 0, nb = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double x = coord(p);
    const double a = std::exp((x - hi) / gamma);
    const double b = std::exp((lo - x) / gamma);
    sa += a;
    na += x * a;
    sb += b;
    nb += x * b;
  }
  const double wmax = na / sa, wmin = nb / sb;
  if constexpr (kGrad) {
    for (std::size_t p = 0; p < n; ++p) {
      const double x = coord(p);
      const double a = std::exp((x - hi) / gamma);
      const double b = std::exp((lo - x) / gamma);
      sink(p, a / sa * (1 + (x - wmax) / gamma) - b / sb * (1 - (x - wmin) / gamma));
    }
  }
  return wmax - wmin;
}

}  // namespace

HpwlResult hpwl(const Design& design, std::span<const Point> positions) {
  require_placed(design, positions);
  HpwlResult out;
  out.per_net.reserve(design.nets.size());
  for (const auto& net : design.nets) {
    double len = 0.0;
    if (net.pins.size() > 1) {
      Point p0 = pin_position(positions, net.pins.front());
      double xl = p0.x, xh = p0.x, yl = p0.y, yh = p0.y;
      for (const auto& pin : net.pins) {
        Point p = pin_position(positions, pin);
        xl = std::min(xl, p.x);
        xh = std::max(xh, p.x);
        yl = std::min(yl, p.y);
        yh = std::max(yh, p.y);
      }
      len = (xh - xl) + (yh - yl);
    }
    out.per_net.push_back(len);
    out.total += len;
  }
  return out;
}

double wa_wirelength(const Design& design, std::span<const Point> positions, const WlParams& params) {
  require_placed(design, positions);
  double total = 0.0;
  for (const auto& net : design.nets) {
    const auto& pins = net.pins;
    if (pins.size() < 2) continue;
    auto none = [](std::size_t, double) {};
    total += wa_axis<false>(pins.size(), [&](std::size_t p) { return pin_position(positions, pins[p]).x; },
                            params.gamma, none);
    total += wa_axis<false>(pins.size(), [&](std::size_t p) { return pin_position(positions, pins[p]).y; },
                            params.gamma, none);
  }
  return total;
}

std::vector<Point> wa_gradient(const Design& design, std::span<const Point> positions, const WlParams& params,
                               double* value) {
  require_placed(design, positions);
  std::vector<Point> grad(design.instances.size());
  double total = 0.0;
  for (const auto& net : design.nets) {
    const auto& pins = net.pins;
    if (pins.size() < 2) continue;
    auto gx = [&](std::size_t p, double g) { grad[pins[p].inst].x += g; };
    auto gy = [&](std::size_t p, double g) { grad[pins[p].inst].y += g; };
    total += wa_axis<true>(pins.size(), [&](std::size_t p) { return pin_position(positions, pins[p]).x; },
                           params.gamma, gx);
    total += wa_axis<true>(pins.size(), [&](std::size_t p) { return pin_position(positions, pins[p]).y; },
                           params.gamma, gy);
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (design.instances[i].fixed) grad[i] = Point{};
  }
  if (value) *value = total;
  return grad;
}

}  // namespace mplace
