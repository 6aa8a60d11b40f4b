#pragma once

#include <span>
#include <vector>

#include "mplace/types.hpp"

namespace mplace {

struct WlParams {
  double gamma = 1.0;  ///< smoothing temperature, grid units
};

struct HpwlResult {
  double total = 0.0;
  std::vector<double> per_net;
};

inline Point pin_position(std::span<const Point> positions, const Pin& pin) {
  return {positions[pin.inst].x + pin.dx, positions[pin.inst].y + pin.dy};
}

/// Half-perimeter wirelength of every net. `positions` must cover every instance.
HpwlResult hpwl(const Design& design, std::span<const Point> positions);

/// Weighted-average smooth wirelength, summed over nets and both axes.
double wa_wirelength(const Design& design, std::span<const Point> positions, const WlParams& params);

/**
 * @brief Analytic gradient of wa_wirelength per instance. Fixed instances get zeros.
 * @param value receives the wirelength when non-null
 */
std::vector<Point> wa_gradient(const Design& design, std::span<const Point> positions, const WlParams& params,
                               double* value = nullptr);

}  // namespace mplace
