#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mplace/cascade.hpp"
#include "mplace/global_placer.hpp"
#include "mplace/legality.hpp"
#include "mplace/legalizer.hpp"
#include "mplace/rng.hpp"
#include "support.hpp"

using namespace mplace;
using testing::add_inst;
using testing::add_net;
using testing::fabric;

namespace {

// fabric(24, 20): DSP columns 6 and 18 with ten sites of height 2, BRAM columns 11 and 23 with four of height 5.

void take_all_but(SitePool& pool, ResourceType r, const std::set<SiteId>& keep) {
  for (const SiteId& s : pool.free_sites(r))
    if (!keep.contains(s)) pool.take(s);
}

// A shape of `n` DSPs, already merged into one tall instance.
int add_cascade(Design& d, const FpgaLayout& layout, const std::string& name, int n, int region = -1) {
  Instance& in = add_inst(d, layout, name, ResourceType::DSP, region);
  in.demand = n;
  in.height *= n;
  return static_cast<int>(d.instances.size()) - 1;
}

}  // namespace

TEST_CASE("arc cost") {
  const FpgaLayout layout = fabric();
  Design d;
  add_inst(d, layout, "m", ResourceType::DSP);
  for (int i = 0; i < 6; ++i) add_inst(d, layout, "l" + std::to_string(i), ResourceType::LUT);
  add_net(d, "two", {Pin{0, 0, 0}, Pin{1, 0, 0}});
  CHECK(precond_wl(d, 0) == 1.0);
  CHECK(arc_cost(precond_wl(d, 0), {1, 1}, {4, 3}) == 500.0);

  Design e = d;
  e.nets.clear();
  add_net(e, "three", {Pin{0, 0, 0}, Pin{1, 0, 0}, Pin{2, 0, 0}});
  add_net(e, "five", {Pin{0, 0, 0}, Pin{3, 0, 0}, Pin{4, 0, 0}, Pin{5, 0, 0}, Pin{6, 0, 0}});
  add_net(e, "alone", {Pin{0, 0, 0}});
  CHECK(precond_wl(e, 0) == 0.75);
  CHECK(arc_cost(precond_wl(e, 0), {6, 2}, {6, 4}) == doctest::Approx(150.0).epsilon(1e-15));
  CHECK(arc_cost(precond_wl(e, 0), {6, 4}, {6, 4}) == 0.0);
}

TEST_CASE("cascades") {
  const FpgaLayout layout = fabric();

  SUBCASE("single fitting run") {
    Design d;
    add_cascade(d, layout, "c", 3);
    SitePool pool(layout, d);
    take_all_but(pool, ResourceType::DSP, {{18, 4}, {18, 5}, {18, 6}, {6, 0}, {6, 1}, {6, 9}});
    const std::vector<Point> gp{{6, 0}};
    const auto a = legalize_cascades(d, gp, pool, precond_wl_all(d));
    REQUIRE(a.size() == 1);
    CHECK(a[0].site == SiteId{18, 4});
    CHECK(pool.free_slots({18, 5}) == 0);
    CHECK(pool.free_slots({6, 0}) == 1);
  }

  SUBCASE("equal shapes: lower index takes the nearer run") {
    Design d;
    add_cascade(d, layout, "a", 2);
    add_cascade(d, layout, "b", 2);
    SitePool pool(layout, d);
    take_all_but(pool, ResourceType::DSP, {{6, 0}, {6, 1}, {6, 2}, {6, 3}, {18, 8}, {18, 9}});
    const std::vector<Point> gp{{6, 0}, {6, 0}};
    const auto a = legalize_cascades(d, gp, pool, precond_wl_all(d));
    REQUIRE(a.size() == 2);
    CHECK(a[0].inst == 0);
    CHECK(a[0].site == SiteId{6, 0});
    CHECK(a[1].site == SiteId{6, 2});
  }

  SUBCASE("taller shapes go first") {
    Design d;
    add_cascade(d, layout, "short", 2);
    add_cascade(d, layout, "tall", 4);
    SitePool pool(layout, d);
    take_all_but(pool, ResourceType::DSP, {{6, 0}, {6, 1}, {6, 2}, {6, 3}, {18, 0}, {18, 1}});
    const std::vector<Point> gp{{6, 0}, {18, 0}};
    const auto a = legalize_cascades(d, gp, pool, precond_wl_all(d));
    REQUIRE(a.size() == 2);
    CHECK(a[0].inst == 1);
    CHECK(a[0].site == SiteId{6, 0});
    CHECK(a[1].site == SiteId{18, 0});
  }

  SUBCASE("region without a macro column") {
    Design d;
    d.regions.push_back(Region{"logic", {Rect{0, 0, 5, 20}}});
    add_cascade(d, layout, "c", 2, 0);
    SitePool pool(layout, d);
    const std::vector<Point> gp{{1, 1}};
    CHECK_THROWS_AS(legalize_cascades(d, gp, pool, precond_wl_all(d)), InfeasibleError);
  }
}

TEST_CASE("region macros") {
  const FpgaLayout layout = fabric();

  SUBCASE("one macro, one free site, far away") {
    Design d;
    d.regions.push_back(Region{"r", {Rect{0, 0, 24, 20}}});
    add_inst(d, layout, "m", ResourceType::DSP, 0);
    SitePool pool(layout, d);
    take_all_but(pool, ResourceType::DSP, {{18, 9}});
    std::vector<bool> done(1, false);
    const std::vector<Point> gp{{6, 0}};
    const auto a = legalize_region_macros(d, gp, pool, precond_wl_all(d), done);
    REQUIRE(a.size() == 1);
    CHECK(a[0].site == SiteId{18, 9});
    CHECK(done[0]);
  }

  SUBCASE("the smaller region is served first") {
    Design d;
    d.regions.push_back(Region{"large", {Rect{5, 0, 8, 10}}});
    d.regions.push_back(Region{"small", {Rect{5, 0, 8, 4}}});
    for (int i = 0; i < 3; ++i) add_inst(d, layout, "L" + std::to_string(i), ResourceType::DSP, 0);
    for (int i = 0; i < 2; ++i) add_inst(d, layout, "S" + std::to_string(i), ResourceType::DSP, 1);
    for (int i = 0; i < 5; ++i) add_inst(d, layout, "x" + std::to_string(i), ResourceType::LUT);
    for (int i = 0; i < 5; ++i) add_net(d, "n" + std::to_string(i), {Pin{i, 0, 0}, Pin{5 + i, 0, 0}});
    SitePool pool(layout, d);
    std::vector<bool> done(d.instances.size(), false);
    // the large region's macros sit right on the small region's sites
    std::vector<Point> gp(d.instances.size(), Point{0, 0});
    gp[0] = {6, 0};
    gp[1] = {6, 2};
    gp[2] = {6, 0};
    gp[3] = {6, 8};
    gp[4] = {6, 8};
    const auto a = legalize_region_macros(d, gp, pool, precond_wl_all(d), done);
    REQUIRE(a.size() == 5);
    std::map<int, SiteId> at;
    for (const auto& s : a) at[s.inst] = s.site;
    CHECK(std::set<SiteId>{at[3], at[4]} == std::set<SiteId>{{6, 0}, {6, 1}});
    CHECK(std::set<SiteId>{at[0], at[1], at[2]} == std::set<SiteId>{{6, 2}, {6, 3}, {6, 4}});
    CHECK(a[0].inst >= 3);  // small region first
  }

  SUBCASE("macros already on distinct sites stay put") {
    Design d;
    d.regions.push_back(Region{"r", {Rect{0, 0, 24, 20}}});
    for (int i = 0; i < 4; ++i) add_inst(d, layout, "m" + std::to_string(i), ResourceType::DSP, 0);
    add_inst(d, layout, "x", ResourceType::LUT);
    for (int i = 0; i < 4; ++i) add_net(d, "n" + std::to_string(i), {Pin{i, 0, 0}, Pin{4, 0, 0}});
    SitePool pool(layout, d);
    std::vector<bool> done(5, false);
    const std::vector<Point> gp{{6, 4}, {18, 0}, {6, 8}, {18, 18}, {1, 1}};
    const auto a = legalize_region_macros(d, gp, pool, precond_wl_all(d), done);
    double cost = 0;
    for (const auto& s : a) {
      cost += s.cost;
      CHECK(layout.site_rect(s.site).xl == gp[s.inst].x);
      CHECK(layout.site_rect(s.site).yl == gp[s.inst].y);
    }
    CHECK(cost == 0);
  }

  SUBCASE("too many macros") {
    Design d;
    d.regions.push_back(Region{"r", {Rect{5, 0, 8, 4}}});
    for (int i = 0; i < 3; ++i) add_inst(d, layout, "m" + std::to_string(i), ResourceType::DSP, 0);
    SitePool pool(layout, d);
    std::vector<bool> done(3, false);
    const std::vector<Point> gp(3, Point{6, 0});
    CHECK_THROWS_AS(legalize_region_macros(d, gp, pool, precond_wl_all(d), done), InfeasibleError);
  }
}

TEST_CASE("remaining macros") {
  const FpgaLayout layout = fabric();

  SUBCASE("nothing to do") {
    Design d;
    add_inst(d, layout, "x", ResourceType::LUT);
    SitePool pool(layout, d);
    std::vector<bool> done(1, false);
    const std::vector<Point> gp{{1, 1}};
    CHECK(legalize_remaining(d, gp, pool, precond_wl_all(d), done).empty());
  }

  SUBCASE("single DSP takes the nearest site") {
    Design d;
    add_inst(d, layout, "m", ResourceType::DSP);
    add_inst(d, layout, "x", ResourceType::LUT);
    add_net(d, "n", {Pin{0, 0, 0}, Pin{1, 0, 0}});
    SitePool pool(layout, d);
    std::vector<bool> done(2, false);
    const std::vector<Point> gp{{16.2, 7.1}, {1, 1}};
    const auto a = legalize_remaining(d, gp, pool, precond_wl_all(d), done);
    REQUIRE(a.size() == 1);
    CHECK(a[0].site == SiteId{18, 4});
  }

  SUBCASE("matches the exhaustive optimum") {
    Rng rng(8);
    for (int t = 0; t < 5; ++t) {
      Design d;
      for (int i = 0; i < 8; ++i) add_inst(d, layout, "m" + std::to_string(i), ResourceType::DSP);
      for (int i = 0; i < 4; ++i) add_inst(d, layout, "x" + std::to_string(i), ResourceType::LUT);
      for (int i = 0; i < 8; ++i) {
        add_net(d, "a" + std::to_string(i), {Pin{i, 0, 0}, Pin{8 + i % 4, 0, 0}});
        if (i % 3 == 0) add_net(d, "b" + std::to_string(i), {Pin{i, 0, 0}, Pin{8, 0, 0}, Pin{9, 0, 0}});
      }
      std::vector<Point> gp;
      for (int i = 0; i < 12; ++i) gp.push_back({rng.uniform(0, 23), rng.uniform(0, 18)});
      SitePool pool(layout, d);
      std::set<SiteId> keep;
      const auto all = pool.free_sites(ResourceType::DSP);
      while (keep.size() < 12) keep.insert(all[rng.below(all.size())]);
      take_all_but(pool, ResourceType::DSP, keep);
      take_all_but(pool, ResourceType::BRAM, {});

      const auto precond = precond_wl_all(d);
      const std::vector<SiteId> slots(keep.begin(), keep.end());
      AssignmentProblem full{8, 12, {}};
      for (int m = 0; m < 8; ++m) {
        for (int s = 0; s < 12; ++s) {
          const Rect r = layout.site_rect(slots[s]);
          full.arcs.push_back(Arc{m, s, integer_cost(arc_cost(precond[m], gp[m], {r.xl, r.yl}))});
        }
      }
      std::vector<bool> done(12, false);
      const auto a = legalize_remaining(d, gp, pool, precond, done, LegalizeOptions{4});
      REQUIRE(a.size() == 8);
      std::int64_t total = 0;
      for (const auto& s : a) total += integer_cost(s.cost);
      CHECK(total == assignment_oracle(full));
    }
  }
}

namespace {

struct TinyRun {
  Benchmark bench;
  MergeResult merged;
  std::vector<Point> gp;
};

TinyRun tiny_gp(std::uint64_t seed) {
  TinyRun t{generate_benchmark(seed, Profile::Tiny), {}, {}};
  t.merged = merge_cascades(t.bench.design, t.bench.layout);
  GpConfig c;
  c.seed = seed;
  t.gp = run_global_placement(t.bench.layout, t.merged.design, c).state.positions;
  return t;
}

}  // namespace

TEST_CASE("tiny benchmark end to end") {
  const TinyRun t = tiny_gp(1);
  const LegalizeResult r = legalize(t.bench.layout, t.merged.design, t.gp);
  const Placement p = expand_placement(t.merged, Placement{r.positions, r.legal});
  const LegalityReport rep = check_legality(t.bench.layout, t.bench.design, p);
  for (const auto& v : rep.violations) INFO(v.message);
  CHECK(rep.legal());

  std::set<SiteId> seen;
  for (const auto& a : r.assignments) {
    for (int k = 0; k < t.merged.design.instances[a.inst].demand; ++k) CHECK(seen.insert({a.site.x, a.site.k + k}).second);
  }
  for (std::size_t i = 0; i < t.merged.design.instances.size(); ++i) {
    if (!is_macro(t.merged.design.instances[i].resource)) {
      CHECK_FALSE(r.legal[i]);
      CHECK(r.positions[i] == t.gp[i]);
    }
  }
  CHECK(r.phase_counts[1] > 0);
  CHECK(r.phase_counts[3] > 0);

  const LegalizeResult again = legalize(t.bench.layout, t.merged.design, t.gp);
  CHECK(again.positions == r.positions);
  CHECK(write_legalization_report(t.merged.design, again) == write_legalization_report(t.merged.design, r));

  SUBCASE("a legal input does not move") {
    const LegalizeResult twice = legalize(t.bench.layout, t.merged.design, r.positions);
    double moved = 0;
    for (const auto& a : twice.assignments) moved += a.displacement;
    CHECK(moved == 0);
    CHECK(twice.positions == r.positions);
  }
}

TEST_CASE("cascades only") {
  const FpgaLayout layout = fabric();
  Design d;
  add_cascade(d, layout, "a", 3);
  add_cascade(d, layout, "b", 2);
  add_cascade(d, layout, "c", 3);
  const std::vector<Point> gp{{6, 1}, {6, 1}, {17, 3}};
  const LegalizeResult r = legalize(layout, d, gp);
  CHECK(r.phase_counts[1] == 3);
  CHECK(r.phase_counts[2] == 0);
  CHECK(r.phase_counts[3] == 0);
  CHECK(r.positions[0] == Point{6, 0});
  CHECK(r.positions[1] == Point{6, 6});
  CHECK(r.positions[2] == Point{18, 2});
}
