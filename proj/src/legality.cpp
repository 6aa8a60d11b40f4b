#include "mplace/legality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mplace {

namespace {
constexpr double kAlignTol = 1e-9;

bool near_int(double v, long long& out) {
  double r = std::round(v);
  if (std::abs(v - r) > kAlignTol) return false;
  out = static_cast<long long>(r);
  return true;
}
}  // namespace

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::WrongSite: return "wrong-site";
    case ViolationKind::Overlap: return "overlap";
    case ViolationKind::BrokenShape: return "non-contiguous-shape";
    case ViolationKind::OutOfRegion: return "out-of-region";
  }
  return "unknown";
}

std::size_t LegalityReport::count(ViolationKind k) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

std::optional<SiteId> site_of(const FpgaLayout& layout, const Instance& inst, Point pos) {
  long long x = 0, y = 0;
  if (!near_int(pos.x, x) || !near_int(pos.y, y)) return std::nullopt;
  const SiteType* st = layout.column_site(static_cast<int>(x));
  if (!st || st->capacity_of(inst.resource) <= 0) return std::nullopt;
  if (y % st->height != 0) return std::nullopt;
  int k = static_cast<int>(y / st->height);
  if (k < 0 || k + inst.demand > layout.sites_in_column(static_cast<int>(x))) return std::nullopt;
  return SiteId{static_cast<int>(x), k};
}

LegalityReport check_legality(const FpgaLayout& layout, const Design& design, const Placement& placement) {
  LegalityReport report;
  const auto& insts = design.instances;
  const int n = static_cast<int>(insts.size());
  std::vector<std::optional<SiteId>> sites(n);
  std::map<SiteId, std::vector<int>> occupancy;

  for (int i = 0; i < n; ++i) {
    const auto& inst = insts[i];
    if (!is_macro(inst.resource)) continue;
    sites[i] = site_of(layout, inst, placement.positions[i]);
    if (!sites[i]) {
      report.violations.push_back({ViolationKind::WrongSite, {i}, "macro '" + inst.name + "' is not on a " +
                                                                    std::string(to_string(inst.resource)) + " site"});
      continue;
    }
    for (int d = 0; d < inst.demand; ++d) occupancy[SiteId{sites[i]->x, sites[i]->k + d}].push_back(i);
  }

  for (const auto& [site, occupants] : occupancy) {
    const SiteType* st = layout.column_site(site.x);
    // occupants of one slot share a column, so they share a site type
    int cap = st->capacity_of(insts[occupants.front()].resource);
    if (static_cast<int>(occupants.size()) > cap) {
      std::string msg = "site (" + std::to_string(site.x) + "," + std::to_string(site.k) + ") holds";
      for (int i : occupants) msg += " '" + insts[i].name + "'";
      report.violations.push_back({ViolationKind::Overlap, occupants, msg});
    }
  }

  for (const auto& shape : design.shapes) {
    bool ok = true;
    const auto& first = sites[shape.members.front()];
    for (std::size_t o = 0; o < shape.members.size() && ok; ++o) {
      const auto& s = sites[shape.members[o]];
      ok = first && s && s->x == first->x && s->k == first->k + static_cast<int>(o);
    }
    if (!ok) {
      report.violations.push_back(
          {ViolationKind::BrokenShape, shape.members, "shape '" + shape.id + "' is not stacked in one column"});
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto& inst = insts[i];
    if (inst.region < 0) continue;
    Rect box;
    if (is_macro(inst.resource) && sites[i]) {
      Rect lo = layout.site_rect(*sites[i]);
      Rect hi = layout.site_rect(SiteId{sites[i]->x, sites[i]->k + inst.demand - 1});
      box = Rect{lo.xl, lo.yl, lo.xh, hi.yh};
    } else {
      const Point p = placement.positions[i];
      box = Rect{p.x, p.y, p.x + inst.width, p.y + inst.height};
    }
    if (!design.regions[inst.region].contains(box)) {
      report.violations.push_back({ViolationKind::OutOfRegion, {i}, "instance '" + inst.name +
                                                                         "' lies outside region '" +
                                                                         design.regions[inst.region].id + "'"});
    }
  }
  return report;
}

}  // namespace mplace
