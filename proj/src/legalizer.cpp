#include "mplace/legalizer.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mplace/io.hpp"
#include "mplace/legality.hpp"

namespace mplace {

namespace {

Point site_corner(const FpgaLayout& layout, SiteId s) {
  const Rect r = layout.site_rect(s);
  return {r.xl, r.yl};
}

double manhattan(Point a, Point b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

SiteAssignment make_assignment(int inst, SiteId site, int phase, const FpgaLayout& layout,
                               std::span<const Point> gp, std::span<const double> precond) {
  const Point corner = site_corner(layout, site);
  return SiteAssignment{inst, site, phase, manhattan(gp[inst], corner), arc_cost(precond[inst], gp[inst], corner)};
}

}  // namespace

double precond_wl(const Design& design, int inst) {
  double sum = 0.0;
  for (const auto& net : design.nets) {
    if (net.pins.size() < 2) continue;
    if (std::any_of(net.pins.begin(), net.pins.end(), [inst](const Pin& p) { return p.inst == inst; }))
      sum += 1.0 / static_cast<double>(net.pins.size() - 1);
  }
  return sum;
}

std::vector<double> precond_wl_all(const Design& design) {
  std::vector<double> out(design.instances.size(), 0.0);
  std::vector<int> last_net(design.instances.size(), -1);
  for (std::size_t e = 0; e < design.nets.size(); ++e) {
    const auto& pins = design.nets[e].pins;
    if (pins.size() < 2) continue;
    for (const auto& p : pins) {
      // an instance with several pins on one net counts the net once
      if (last_net[p.inst] == static_cast<int>(e)) continue;
      last_net[p.inst] = static_cast<int>(e);
      out[p.inst] += 1.0 / static_cast<double>(pins.size() - 1);
    }
  }
  return out;
}

SitePool::SitePool(const FpgaLayout& layout, const Design& design) : layout_(layout), design_(design) {
  free_.resize(layout.grid_w());
  for (int x = 0; x < layout.grid_w(); ++x) {
    const SiteType* st = layout.column_site(x);
    if (!st || layout.column_types()[x] < 0) continue;
    const int cap = std::max(st->capacity_of(ResourceType::DSP), st->capacity_of(ResourceType::BRAM));
    free_[x].assign(layout.sites_in_column(x), cap);
  }
}

void SitePool::take(SiteId s) {
  if (s.x < 0 || s.x >= static_cast<int>(free_.size()) || s.k < 0 || s.k >= static_cast<int>(free_[s.x].size()) ||
      free_[s.x][s.k] <= 0)
    throw InfeasibleError("site (" + std::to_string(s.x) + "," + std::to_string(s.k) + ") is not free");
  --free_[s.x][s.k];
}

std::vector<SiteId> SitePool::free_sites(ResourceType r, int region) const {
  std::vector<SiteId> out;
  for (int x : layout_.columns_hosting(r)) {
    for (int k = 0; k < static_cast<int>(free_[x].size()); ++k) {
      if (free_[x][k] <= 0) continue;
      if (region >= 0 && !design_.regions[region].contains(layout_.site_rect(SiteId{x, k}))) continue;
      for (int c = 0; c < free_[x][k]; ++c) out.push_back(SiteId{x, k});
    }
  }
  return out;
}

int SitePool::free_count(int region) const {
  return static_cast<int>(free_sites(ResourceType::DSP, region).size() +
                          free_sites(ResourceType::BRAM, region).size());
}

std::vector<SiteAssignment> legalize_cascades(const Design& design, std::span<const Point> gp, SitePool& pool,
                                              std::span<const double> precond) {
  const FpgaLayout& layout = pool.layout();
  std::vector<int> order;
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& inst = design.instances[i];
    if (is_macro(inst.resource) && !inst.fixed && inst.demand > 1) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return design.instances[a].demand > design.instances[b].demand; });

  std::vector<SiteAssignment> out;
  for (int i : order) {
    const auto& inst = design.instances[i];
    const Region* region = inst.region >= 0 ? &design.regions[inst.region] : nullptr;
    bool found = false;
    SiteId best;
    double best_dist = 0.0;
    for (int x : layout.columns_hosting(inst.resource)) {
      const int sites = layout.sites_in_column(x);
      for (int k = 0; k + inst.demand <= sites; ++k) {
        bool free = true;
        for (int d = 0; d < inst.demand && free; ++d) free = pool.free_slots(SiteId{x, k + d}) > 0;
        if (!free) continue;
        if (region) {
          Rect box = layout.site_rect(SiteId{x, k});
          box.yh = layout.site_rect(SiteId{x, k + inst.demand - 1}).yh;
          if (!region->contains(box)) continue;
        }
        const double dist = manhattan(gp[i], site_corner(layout, SiteId{x, k}));
        if (!found || dist < best_dist) {
          found = true;
          best = SiteId{x, k};
          best_dist = dist;
        }
      }
    }
    if (!found) throw InfeasibleError("cascade '" + inst.name + "' has no free run of " +
                                      std::to_string(inst.demand) + " sites" +
                                      (region ? " inside region '" + region->id + "'" : std::string()));
    for (int d = 0; d < inst.demand; ++d) pool.take(SiteId{best.x, best.k + d});
    out.push_back(make_assignment(i, best, 1, layout, gp, precond));
  }
  return out;
}

AssignmentResult match_macros(std::span<const int> macros, std::span<const SiteId> slots, const Design& design,
                              const FpgaLayout& layout, std::span<const Point> gp, std::span<const double> precond,
                              int candidates) {
  if (macros.size() > slots.size()) throw InfeasibleError("more macros than free sites");
  std::vector<Point> corners;
  corners.reserve(slots.size());
  for (const auto& s : slots) corners.push_back(site_corner(layout, s));

  int cap = std::max(1, candidates);
  while (true) {
    AssignmentProblem problem;
    problem.num_left = static_cast<int>(macros.size());
    problem.num_right = static_cast<int>(slots.size());
    std::vector<int> idx;
    for (std::size_t m = 0; m < macros.size(); ++m) {
      const int i = macros[m];
      idx.clear();
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (layout.column_site(slots[s].x)->capacity_of(design.instances[i].resource) > 0)
          idx.push_back(static_cast<int>(s));
      }
      auto closer = [&](int a, int b) {
        const double da = manhattan(gp[i], corners[a]), db = manhattan(gp[i], corners[b]);
        return da != db ? da < db : a < b;
      };
      if (static_cast<int>(idx.size()) > cap) {
        std::nth_element(idx.begin(), idx.begin() + cap, idx.end(), closer);
        idx.resize(cap);
      }
      std::sort(idx.begin(), idx.end());
      for (int s : idx)
        problem.arcs.push_back(
            Arc{static_cast<int>(m), s, integer_cost(arc_cost(precond[i], gp[i], corners[s]))});
    }
    try {
      return solve_assignment(problem);
    } catch (const InfeasibleError&) {
      if (cap >= static_cast<int>(slots.size())) throw;
      cap = static_cast<int>(std::min<std::size_t>(slots.size(), static_cast<std::size_t>(cap) * 2));
    }
  }
}

namespace {

std::vector<SiteAssignment> match_and_take(const std::vector<int>& macros, const std::vector<SiteId>& slots,
                                           const Design& design, std::span<const Point> gp, SitePool& pool,
                                           std::span<const double> precond, std::vector<bool>& done, int phase,
                                           int candidates) {
  std::vector<SiteAssignment> out;
  if (macros.empty()) return out;
  const AssignmentResult res = match_macros(macros, slots, design, pool.layout(), gp, precond, candidates);
  for (std::size_t m = 0; m < macros.size(); ++m) {
    const SiteId site = slots[res.match[m]];
    pool.take(site);
    done[macros[m]] = true;
    out.push_back(make_assignment(macros[m], site, phase, pool.layout(), gp, precond));
  }
  return out;
}

std::vector<SiteId> free_macro_sites(const SitePool& pool, int region) {
  std::vector<SiteId> slots = pool.free_sites(ResourceType::DSP, region);
  for (const auto& s : pool.free_sites(ResourceType::BRAM, region)) slots.push_back(s);
  std::sort(slots.begin(), slots.end());
  return slots;
}

}  // namespace

std::vector<SiteAssignment> legalize_region_macros(const Design& design, std::span<const Point> gp, SitePool& pool,
                                                   std::span<const double> precond, std::vector<bool>& done,
                                                   const LegalizeOptions& options) {
  const int nr = static_cast<int>(design.regions.size());
  std::vector<int> free(nr);
  for (int r = 0; r < nr; ++r) free[r] = pool.free_count(r);
  std::vector<int> order(nr);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return free[a] < free[b]; });

  std::vector<SiteAssignment> out;
  for (int r : order) {
    std::vector<int> macros;
    for (std::size_t i = 0; i < design.instances.size(); ++i) {
      const auto& inst = design.instances[i];
      if (!done[i] && is_macro(inst.resource) && inst.region == r) macros.push_back(static_cast<int>(i));
    }
    if (macros.empty()) continue;
    const std::vector<SiteId> slots = free_macro_sites(pool, r);
    std::vector<SiteAssignment> got;
    try {
      got = match_and_take(macros, slots, design, gp, pool, precond, done, 2, options.candidates);
    } catch (const InfeasibleError&) {
      throw InfeasibleError("region '" + design.regions[r].id + "' has " + std::to_string(macros.size()) +
                            " macros but not enough free sites of the right type");
    }
    out.insert(out.end(), got.begin(), got.end());
  }
  return out;
}

std::vector<SiteAssignment> legalize_remaining(const Design& design, std::span<const Point> gp, SitePool& pool,
                                               std::span<const double> precond, std::vector<bool>& done,
                                               const LegalizeOptions& options) {
  std::vector<int> macros;
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    if (!done[i] && is_macro(design.instances[i].resource)) macros.push_back(static_cast<int>(i));
  }
  if (macros.empty()) return {};
  try {
    return match_and_take(macros, free_macro_sites(pool, -1), design, gp, pool, precond, done, 3,
                          options.candidates);
  } catch (const InfeasibleError&) {
    throw InfeasibleError("not enough free macro sites for the " + std::to_string(macros.size()) +
                          " remaining macros");
  }
}

LegalizeResult legalize(const FpgaLayout& layout, const Design& design, std::span<const Point> gp,
                        const LegalizeOptions& options) {
  const std::size_t n = design.instances.size();
  if (gp.size() < n) throw ValidationError("global placement does not cover every instance");
  const std::vector<double> precond = precond_wl_all(design);
  SitePool pool(layout, design);
  std::vector<bool> done(n, false);

  LegalizeResult res;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = design.instances[i];
    if (!is_macro(inst.resource) || !inst.fixed) continue;
    auto site = site_of(layout, inst, inst.fixed_pos);
    if (!site) throw ValidationError("fixed macro '" + inst.name + "' is not on a matching site");
    for (int d = 0; d < inst.demand; ++d) pool.take(SiteId{site->x, site->k + d});
    done[i] = true;
    res.assignments.push_back(SiteAssignment{static_cast<int>(i), *site, 0, 0.0, 0.0});
  }

  for (const auto& a : legalize_cascades(design, gp, pool, precond)) {
    done[a.inst] = true;
    res.assignments.push_back(a);
  }
  for (const auto& a : legalize_region_macros(design, gp, pool, precond, done, options)) res.assignments.push_back(a);
  for (const auto& a : legalize_remaining(design, gp, pool, precond, done, options)) res.assignments.push_back(a);

  res.positions.assign(gp.begin(), gp.begin() + static_cast<std::ptrdiff_t>(n));
  res.legal.assign(n, false);
  for (const auto& a : res.assignments) {
    res.positions[a.inst] = site_corner(layout, a.site);
    res.legal[a.inst] = true;
    ++res.phase_counts[a.phase];
    res.total_cost += a.cost;
  }
  std::sort(res.assignments.begin(), res.assignments.end(),
            [](const SiteAssignment& a, const SiteAssignment& b) { return a.inst < b.inst; });
  return res;
}

std::string write_legalization_report(const Design& design, const LegalizeResult& result) {
  std::ostringstream out;
  out << "inst,phase,x,k,displacement,cost\n";
  for (const auto& a : result.assignments) {
    out << design.instances[a.inst].name << ',' << a.phase << ',' << a.site.x << ',' << a.site.k << ','
        << format_number(a.displacement) << ',' << format_number(a.cost) << '\n';
  }
  out << "# fixed " << result.phase_counts[0] << '\n';
  out << "# phase1 " << result.phase_counts[1] << '\n';
  out << "# phase2 " << result.phase_counts[2] << '\n';
  out << "# phase3 " << result.phase_counts[3] << '\n';
  out << "# total_cost " << format_number(result.total_cost) << '\n';
  return out.str();
}

}  // namespace mplace
