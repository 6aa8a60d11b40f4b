#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mplace/mincost_flow.hpp"
#include "mplace/types.hpp"

namespace mplace {

/// Displacement weight applied on top of the connectivity preconditioner.
inline constexpr double kArcCostScale = 100.0;
inline constexpr int kDefaultCandidates = 32;

/// Sum over the instance's nets with at least two pins of 1 / (pins - 1).
double precond_wl(const Design& design, int inst);
std::vector<double> precond_wl_all(const Design& design);

/// Scaled displacement cost of moving a macro from `from` to the site corner `to`.
inline double arc_cost(double precond, Point from, Point to) {
  return kArcCostScale * precond * (std::abs(from.x - to.x) + std::abs(from.y - to.y));
}

/**
 * @brief Free macro site slots, consumed monotonically during one legalization run.
 *
 * A site offering capacity c for a resource provides c slots.
 */
class SitePool {
 public:
  SitePool(const FpgaLayout& layout, const Design& design);

  int free_slots(SiteId s) const { return free_[s.x][s.k]; }
  void take(SiteId s);
  /// Free slots for resource `r` (one entry per slot), ascending by (x, k); `region` >= 0 filters by footprint.
  std::vector<SiteId> free_sites(ResourceType r, int region = -1) const;
  /// Free macro slots of any type inside the region.
  int free_count(int region) const;

  const FpgaLayout& layout() const { return layout_; }

 private:
  const FpgaLayout& layout_;
  const Design& design_;
  std::vector<std::vector<int>> free_;
};

struct SiteAssignment {
  int inst = -1;  ///< index in the merged design
  SiteId site;
  int phase = 0;  ///< 1 cascades, 2 region macros, 3 remaining macros, 0 fixed
  double displacement = 0.0;
  double cost = 0.0;
};

struct LegalizeOptions {
  int candidates = kDefaultCandidates;
};

/// Phase 1: cascades from the tallest down, each to the nearest fitting run of free sites.
std::vector<SiteAssignment> legalize_cascades(const Design& design, std::span<const Point> gp, SitePool& pool,
                                              std::span<const double> precond);

/// Phase 2: per region, in order of increasing free-site count, a min-cost matching of its single macros.
std::vector<SiteAssignment> legalize_region_macros(const Design& design, std::span<const Point> gp, SitePool& pool,
                                                   std::span<const double> precond, std::vector<bool>& done,
                                                   const LegalizeOptions& options = {});

/// Phase 3: one min-cost matching of every macro not yet placed.
std::vector<SiteAssignment> legalize_remaining(const Design& design, std::span<const Point> gp, SitePool& pool,
                                               std::span<const double> precond, std::vector<bool>& done,
                                               const LegalizeOptions& options = {});

/**
 * @brief Min-cost matching of `macros` to `slots` over the k nearest slots per macro.
 *
 * The candidate count doubles until a perfect matching exists or every slot is a candidate.
 */
AssignmentResult match_macros(std::span<const int> macros, std::span<const SiteId> slots, const Design& design,
                              const FpgaLayout& layout, std::span<const Point> gp, std::span<const double> precond,
                              int candidates);

struct LegalizeResult {
  std::vector<Point> positions;  ///< merged design, macros on site corners
  std::vector<bool> legal;
  std::vector<SiteAssignment> assignments;
  std::array<int, 4> phase_counts{};
  double total_cost = 0.0;
};

/// Runs the three phases on a merged design. Non-macro instances keep their positions.
LegalizeResult legalize(const FpgaLayout& layout, const Design& design, std::span<const Point> gp,
                        const LegalizeOptions& options = {});

/// CSV lines: one row per macro, then per-phase counts and the total cost.
std::string write_legalization_report(const Design& design, const LegalizeResult& result);

}  // namespace mplace
