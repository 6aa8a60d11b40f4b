#pragma once

#include <span>
#include <vector>

#include "mplace/types.hpp"

namespace mplace {

/// Where an instance of the original design ended up after merging.
struct MergedRef {
  int inst = -1;    ///< index in the merged design
  int ordinal = 0;  ///< position inside the cascade, 0 for ordinary instances
};

struct MergedCascade {
  int merged_inst = -1;
  int shape = -1;
  std::vector<int> members;  ///< original indices, bottom to top
  double member_height = 0.0;
};

/**
 * @brief A design whose cascade shapes have been collapsed into single tall instances.
 *
 * Ordinary instances keep their relative order and come first; one merged instance per
 * shape follows, in shape order. `origin` maps every original instance to its merged
 * counterpart so placements can be expanded back.
 */
struct MergeResult {
  Design design;
  std::vector<MergedCascade> cascades;
  std::vector<MergedRef> origin;
  /// merged index -> cascade slot, -1 for ordinary instances
  std::vector<int> cascade_of;
};

/// Collapses every cascade shape into one instance of demand = member count.
MergeResult merge_cascades(const Design& design, const FpgaLayout& layout);

/// Maps merged-design positions back onto the original instances, stacking cascade members upward.
std::vector<Point> expand_positions(const MergeResult& merge, std::span<const Point> merged);
Placement expand_placement(const MergeResult& merge, const Placement& merged);
/// Inverse direction: a merged instance takes the position of its bottom member.
std::vector<Point> collapse_positions(const MergeResult& merge, std::span<const Point> original);

}  // namespace mplace
