#include "mplace/region.hpp"

#include <cmath>
#include <limits>

namespace mplace {

int nearest_fitting_rect(Point pos, double w, double h, const Region& region) {
  int best = -1;
  double best_disp = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < region.rects.size(); ++i) {
    const Rect& r = region.rects[i];
    if (w > r.width() || h > r.height()) continue;
    Point c = clamp_into(pos, w, h, r);
    double disp = std::abs(c.x - pos.x) + std::abs(c.y - pos.y);
    if (disp < best_disp) {
      best_disp = disp;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Point region_clamp(Point pos, double w, double h, const Region& region) {
  int r = nearest_fitting_rect(pos, w, h, region);
  if (r < 0) throw InfeasibleError("box does not fit any rectangle of region '" + region.id + "'");
  return clamp_into(pos, w, h, region.rects[r]);
}

}  // namespace mplace
