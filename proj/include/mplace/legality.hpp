#pragma once

#include <string>
#include <vector>

#include "mplace/types.hpp"

namespace mplace {

enum class ViolationKind { WrongSite, Overlap, BrokenShape, OutOfRegion };

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::vector<int> instances;
  std::string message;
};

struct LegalityReport {
  std::vector<Violation> violations;

  bool legal() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const;
};

/**
 * @brief Audits the macro placement.
 *
 * Flags macros off the site grid or on a site of the wrong type, site slots holding more
 * macros than their capacity, cascade shapes whose members are not stacked bottom to top
 * on consecutive sites of one column, and region-constrained instances outside every
 * member rectangle. Non-macro instances are only checked for region containment.
 */
LegalityReport check_legality(const FpgaLayout& layout, const Design& design, const Placement& placement);

/// Site slot a macro occupies, or nullopt when it is not aligned to a hosting site.
std::optional<SiteId> site_of(const FpgaLayout& layout, const Instance& inst, Point pos);

}  // namespace mplace
