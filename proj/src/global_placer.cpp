#include "mplace/global_placer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mplace/io.hpp"
#include "mplace/region.hpp"
#include "mplace/rng.hpp"
#include "mplace/wirelength.hpp"

namespace mplace {

namespace {

constexpr double kPrecondFloor = 1.0;
constexpr int kStepTries = 3;

int system_of(ResourceType r) { return index_of(r) < 4 ? index_of(r) : -1; }

bool finite(const std::vector<Point>& v) {
  return std::all_of(v.begin(), v.end(), [](const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); });
}

double l1(const std::vector<Point>& v) {
  double s = 0.0;
  for (const auto& p : v) s += std::abs(p.x) + std::abs(p.y);
  return s;
}

Point place_in_region(Point p, const Instance& inst, const Design& design, const FpgaLayout& layout) {
  if (inst.region >= 0) {
    try {
      p = region_clamp(p, inst.width, inst.height, design.regions[inst.region]);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("instance '" + inst.name + "': " + e.what());
    }
  }
  return clamp_to_chip(p, inst.width, inst.height, layout);
}

}  // namespace

void GpConfig::validate() const {
  if (max_iters < 0) throw ValidationError("max_iters must be nonnegative");
  if (!(ovfl_stop_nonmacro > 0 && ovfl_stop_nonmacro <= 1) || !(ovfl_stop_macro > 0 && ovfl_stop_macro <= 1))
    throw ValidationError("overflow thresholds must lie in (0, 1]");
  if (!(lambda_growth > 1)) throw ValidationError("lambda_growth must exceed 1");
  if (checkpoint_every < 1 || divergence_window < 1) throw ValidationError("checkpoint_every and divergence_window must be positive");
  if (!(divergence_factor > 1)) throw ValidationError("divergence_factor must exceed 1");
}

std::string GpTrace::to_csv() const {
  std::ostringstream out;
  out << "iter,hpwl,wa,phi_lut,phi_ff,phi_dsp,phi_bram,lambda_lut,lambda_ff,lambda_dsp,lambda_bram,"
         "ovfl_lut,ovfl_ff,ovfl_dsp,ovfl_bram,gamma\n";
  for (const auto& r : records) {
    out << r.iter << ',' << format_number(r.hpwl) << ',' << format_number(r.wa);
    for (const auto* arr : {&r.phi, &r.lambda, &r.ovfl}) {
      for (double v : *arr) out << ',' << format_number(v);
    }
    out << ',' << format_number(r.gamma) << '\n';
  }
  out << "# status converged=" << converged << " rolled_back=" << rolled_back
      << " iterations=" << records.size() << " best_checkpoint=" << best_checkpoint_iter << '\n';
  return out.str();
}

PlacementState init_placement(const FpgaLayout& layout, const Design& design, std::uint64_t seed) {
  Rng rng(seed);
  std::array<ElectroSystem, 4> systems;
  for (auto r : kPlaceableResources) systems[index_of(r)] = make_system(layout, design, r);

  PlacementState st;
  st.positions.resize(design.instances.size());
  const Point chip_center{layout.grid_w() / 2.0, layout.grid_h() / 2.0};
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& inst = design.instances[i];
    if (inst.fixed) {
      st.positions[i] = inst.fixed_pos;
      continue;
    }
    Point p{chip_center.x - inst.width / 2, chip_center.y - inst.height / 2};
    if (inst.region >= 0) {
      const Region& region = design.regions[inst.region];
      const int r = nearest_fitting_rect(p, inst.width, inst.height, region);
      if (r < 0) throw InfeasibleError("instance '" + inst.name + "' fits no rectangle of region '" + region.id + "'");
      const Rect& rect = region.rects[r];
      p = Point{(rect.xl + rect.xh - inst.width) / 2, (rect.yl + rect.yh - inst.height) / 2};
    }
    const int s = system_of(inst.resource);
    const double bw = s >= 0 ? systems[s].bin_w : 1.0, bh = s >= 0 ? systems[s].bin_h : 1.0;
    p.x += rng.uniform(-2.0, 2.0) * bw;
    p.y += rng.uniform(-2.0, 2.0) * bh;
    st.positions[i] = place_in_region(p, inst, design, layout);
  }
  for (int s = 0; s < 4; ++s) st.fillers[s] = seed_fillers(systems[s], layout, rng);
  return st;
}

GlobalPlacer::GlobalPlacer(const FpgaLayout& layout, const Design& design, const GpConfig& config)
    : layout_(layout), design_(design), config_(config) {
  config_.validate();
  for (auto r : kPlaceableResources) systems_[index_of(r)] = make_system(layout, design, r);
  state_ = init_placement(layout, design, config.seed);
  offset_[0] = 0;
  offset_[1] = design.instances.size();
  for (int s = 0; s < 3; ++s) offset_[s + 2] = offset_[s + 1] + state_.fillers[s].size();
  moves_.assign(offset_[4] + state_.fillers[3].size(), 1);
  for (std::size_t i = 0; i < design.instances.size(); ++i)
    moves_[i] = !design.instances[i].fixed && system_of(design.instances[i].resource) >= 0;
  pins_.assign(design.instances.size(), 0.0);
  for (const auto& net : design.nets) {
    for (const auto& p : net.pins) pins_[p.inst] += 1.0;
  }
  pack(state_, v_);
  u_ = v_;

  // energies at the start set c_s; lambda_s balances the two gradient norms
  const std::span<const Point> pos(v_.data(), design.instances.size());
  for (int s = 0; s < 4; ++s) {
    bin_density(systems_[s], design, pos, std::span<const Point>(v_.data() + offset_[s + 1], state_.fillers[s].size()));
    solve_poisson(systems_[s]);
    ovfl_[s] = overflow(systems_[s]);
    systems_[s].c_quad = systems_[s].energy > 0 ? 1.0 / systems_[s].energy : 1.0;
  }
  update_gamma();
  const double wl_norm = l1(wa_gradient(design, pos, WlParams{gamma_}));
  for (int s = 0; s < 4; ++s) {
    const double dn = l1(density_gradient(systems_[s], design, pos)) +
                      l1(filler_gradient(systems_[s], state_.fillers[s]));
    const double ratio = dn > 0 ? wl_norm / dn : 0.0;
    systems_[s].lambda = ratio > 0 && std::isfinite(ratio) ? ratio : 1.0;
  }

  g_ = gradient(v_);
  // initial step from a short probe along the gradient
  double gmax = 0.0;
  for (const auto& p : g_) gmax = std::max({gmax, std::abs(p.x), std::abs(p.y)});
  alpha_ = systems_[0].bin_w;
  if (gmax > 0) {
    Vec probe = v_;
    const double h = 0.1 * systems_[0].bin_w / gmax;
    for (std::size_t k = 0; k < probe.size(); ++k) {
      probe[k].x -= h * g_[k].x;
      probe[k].y -= h * g_[k].y;
    }
    project(probe);
    const Vec gp = gradient(probe);
    alpha_ = step_estimate(v_, g_, probe, gp);
    g_ = gradient(v_);
  }
}

void GlobalPlacer::pack(const PlacementState& s, Vec& x) const {
  x.assign(s.positions.begin(), s.positions.end());
  for (int k = 0; k < 4; ++k) x.insert(x.end(), s.fillers[k].begin(), s.fillers[k].end());
}

void GlobalPlacer::unpack(const Vec& x, PlacementState& s) const {
  s.positions.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(offset_[1]));
  for (int k = 0; k < 4; ++k)
    s.fillers[k].assign(x.begin() + static_cast<std::ptrdiff_t>(offset_[k + 1]),
                        x.begin() + static_cast<std::ptrdiff_t>(offset_[k + 1] + s.fillers[k].size()));
}

void GlobalPlacer::project(Vec& x) const {
  for (std::size_t i = 0; i < design_.instances.size(); ++i) {
    const auto& inst = design_.instances[i];
    x[i] = inst.fixed ? inst.fixed_pos : place_in_region(x[i], inst, design_, layout_);
  }
  for (int s = 0; s < 4; ++s) {
    const double side = systems_[s].filler_side;
    for (std::size_t k = offset_[s + 1]; k < offset_[s + 1] + state_.fillers[s].size(); ++k)
      x[k] = clamp_to_chip(x[k], side, side, layout_);
  }
}

GlobalPlacer::Vec GlobalPlacer::gradient(const Vec& x) {
  const std::size_t n = design_.instances.size();
  const std::span<const Point> pos(x.data(), n);
  for (int s = 0; s < 4; ++s) {
    bin_density(systems_[s], design_, pos, std::span<const Point>(x.data() + offset_[s + 1], state_.fillers[s].size()));
    solve_poisson(systems_[s]);
    ovfl_[s] = overflow(systems_[s]);
  }
  Vec g = wa_gradient(design_, pos, WlParams{gamma_}, &wa_);
  g.resize(x.size());

  std::vector<double> precond(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int s = system_of(design_.instances[i].resource);
    precond[i] = pins_[i] + (s >= 0 ? systems_[s].lambda * design_.instances[i].area() : 0.0);
  }

  for (int s = 0; s < 4; ++s) {
    const ElectroSystem& sys = systems_[s];
    const double factor = sys.lambda * (1 + 2 * sys.c_quad * sys.energy);
    const Vec dg = density_gradient(sys, design_, pos);
    for (std::size_t i = 0; i < n; ++i) {
      if (system_of(design_.instances[i].resource) != s) continue;
      g[i].x += factor * dg[i].x;
      g[i].y += factor * dg[i].y;
    }
    const Vec fg = filler_gradient(sys, std::span<const Point>(x.data() + offset_[s + 1], state_.fillers[s].size()));
    const double fp = std::max(kPrecondFloor, sys.lambda * sys.filler_side * sys.filler_side);
    for (std::size_t k = 0; k < fg.size(); ++k) {
      g[offset_[s + 1] + k] = Point{factor * fg[k].x / fp, factor * fg[k].y / fp};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (design_.instances[i].fixed) {
      g[i] = Point{};
      continue;
    }
    const double p = std::max(kPrecondFloor, precond[i]);
    g[i].x /= p;
    g[i].y /= p;
  }
  return g;
}

double GlobalPlacer::step_estimate(const Vec& x0, const Vec& g0, const Vec& x1, const Vec& g1) const {
  double dx = 0.0, dg = 0.0;
  for (std::size_t k = 0; k < x0.size(); ++k) {
    if (!moves_[k]) continue;
    dx += (x1[k].x - x0[k].x) * (x1[k].x - x0[k].x) + (x1[k].y - x0[k].y) * (x1[k].y - x0[k].y);
    dg += (g1[k].x - g0[k].x) * (g1[k].x - g0[k].x) + (g1[k].y - g0[k].y) * (g1[k].y - g0[k].y);
  }
  return dg > 0 && dx > 0 ? std::sqrt(dx / dg) : alpha_;
}

void GlobalPlacer::update_gamma() {
  const double ovfl = *std::max_element(ovfl_.begin(), ovfl_.end());
  const double tau = std::clamp(std::pow(10.0, (20.0 / 9.0) * ovfl - 11.0 / 9.0), 0.1, 8.0);
  gamma_ = 0.5 * systems_[0].bin_w * tau;
}

bool GlobalPlacer::step() {
  Vec u_new, v_new, g_new;
  double a_new = a_;
  double alpha_new = alpha_;
  for (int attempt = 0; attempt < kStepTries; ++attempt) {
    u_new = v_;
    for (std::size_t k = 0; k < u_new.size(); ++k) {
      u_new[k].x -= alpha_ * g_[k].x;
      u_new[k].y -= alpha_ * g_[k].y;
    }
    project(u_new);
    a_new = (1 + std::sqrt(4 * a_ * a_ + 1)) / 2;
    const double coef = (a_ - 1) / a_new;
    v_new = u_new;
    for (std::size_t k = 0; k < v_new.size(); ++k) {
      v_new[k].x += coef * (u_new[k].x - u_[k].x);
      v_new[k].y += coef * (u_new[k].y - u_[k].y);
    }
    project(v_new);
    g_new = gradient(v_new);
    alpha_new = step_estimate(v_, g_, v_new, g_new);
    // retry while the step estimate shrinks noticeably
    if (!std::isfinite(alpha_new) || alpha_new >= 0.95 * alpha_) break;
    alpha_ = alpha_new;
  }
  u_ = std::move(u_new);
  v_ = std::move(v_new);
  g_ = std::move(g_new);
  a_ = a_new;
  alpha_ = alpha_new;
  for (auto& sys : systems_) sys.lambda *= config_.lambda_growth;
  update_gamma();
  unpack(v_, state_);
  ++state_.iteration;
  return finite(v_) && finite(g_) && std::isfinite(alpha_) && std::isfinite(wa_);
}

bool GlobalPlacer::converged() const {
  return ovfl_[0] < config_.ovfl_stop_nonmacro && ovfl_[1] < config_.ovfl_stop_nonmacro &&
         ovfl_[2] < config_.ovfl_stop_macro && ovfl_[3] < config_.ovfl_stop_macro;
}

GpIterRecord GlobalPlacer::record() const {
  GpIterRecord r;
  r.iter = state_.iteration;
  r.hpwl = hpwl(design_, state_.positions).total;
  r.wa = wa_;
  for (int s = 0; s < 4; ++s) {
    r.phi[s] = systems_[s].energy;
    r.lambda[s] = systems_[s].lambda;
    r.ovfl[s] = ovfl_[s];
  }
  r.gamma = gamma_;
  return r;
}

Checkpoint GlobalPlacer::checkpoint() const {
  Checkpoint cp;
  cp.state = state_;
  for (int s = 0; s < 4; ++s) cp.lambda[s] = systems_[s].lambda;
  cp.gamma = gamma_;
  cp.iteration = state_.iteration;
  cp.macro_overflow = macro_overflow();
  cp.hpwl = hpwl(design_, state_.positions).total;
  return cp;
}

GpResult run_global_placement(const FpgaLayout& layout, const Design& design, const GpConfig& config) {
  GlobalPlacer gp(layout, design, config);
  GpResult res;
  Checkpoint best = gp.checkpoint();
  auto better = [](const Checkpoint& a, const Checkpoint& b) {
    return a.macro_overflow != b.macro_overflow ? a.macro_overflow < b.macro_overflow : a.hpwl < b.hpwl;
  };
  auto finite_record = [](const GpIterRecord& r) {
    bool ok = std::isfinite(r.hpwl) && std::isfinite(r.wa) && std::isfinite(r.gamma);
    for (int s = 0; s < 4; ++s) ok = ok && std::isfinite(r.phi[s]) && std::isfinite(r.lambda[s]) && std::isfinite(r.ovfl[s]);
    return ok;
  };

  int regressing = 0;
  bool diverged = false;
  for (int it = 1; it <= config.max_iters; ++it) {
    const bool ok = gp.step();
    const GpIterRecord rec = gp.record();
    if (!ok || !finite_record(rec)) {
      diverged = true;
      break;
    }
    res.trace.records.push_back(rec);
    if (it % config.checkpoint_every == 0) {
      Checkpoint cp = gp.checkpoint();
      if (better(cp, best)) best = std::move(cp);
    }
    regressing = gp.macro_overflow() > config.divergence_factor * best.macro_overflow ? regressing + 1 : 0;
    if (regressing >= config.divergence_window) {
      diverged = true;
      break;
    }
    if (gp.converged()) {
      res.trace.converged = true;
      break;
    }
  }
  // an unconverged run that ends worse than its best checkpoint is treated like a divergence
  if (!diverged && !res.trace.converged && !res.trace.records.empty() && best.macro_overflow < gp.macro_overflow())
    diverged = true;
  res.trace.best_checkpoint_iter = best.iteration;
  if (diverged) {
    res.trace.rolled_back = true;
    res.state = std::move(best.state);
  } else {
    res.state = gp.state();
  }
  return res;
}

}  // namespace mplace
