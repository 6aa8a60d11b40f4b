#pragma once

#include <algorithm>
#include <cmath>

#include "mplace/types.hpp"

namespace mplace {

/**
 * @brief Index of the member rectangle that keeps a w x h box closest to `pos`.
 *
 * Only rectangles the box fits in are considered; ties go to the lower index.
 * Returns -1 if the box fits in none.
 */
int nearest_fitting_rect(Point pos, double w, double h, const Region& region);

/// Box clamp of a lower-left corner into one rectangle.
inline double upper_corner(double lo, double hi, double size) {
  // hi - size can round so that adding size back overshoots hi
  double c = hi - size;
  while (c > lo && c + size > hi) c = std::nextafter(c, lo);
  return c;
}

inline Point clamp_into(Point pos, double w, double h, const Rect& r) {
  pos.x = std::min(std::max(pos.x, r.xl), upper_corner(r.xl, r.xh, w));
  pos.y = std::min(std::max(pos.y, r.yl), upper_corner(r.yl, r.yh, h));
  return pos;
}

/// Moves a w x h box at `pos` into `region`. Throws InfeasibleError if the box fits no rectangle.
Point region_clamp(Point pos, double w, double h, const Region& region);

}  // namespace mplace
