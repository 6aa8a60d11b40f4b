#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mplace/density.hpp"
#include "support.hpp"

using namespace mplace;

namespace {

Instance box(const std::string& name, ResourceType r, double w, double h) {
  Instance in;
  in.name = name;
  in.resource = r;
  in.width = w;
  in.height = h;
  return in;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Brute-force overlap of axis-aligned boxes with bins.
std::vector<double> overlap_oracle(const ElectroSystem& sys, const Design& d, const std::vector<Point>& pos) {
  std::vector<double> g(sys.size(), 0.0);
  for (std::size_t i = 0; i < d.instances.size(); ++i) {
    const auto& in = d.instances[i];
    if (in.resource != sys.resource) continue;
    for (int ix = 0; ix < sys.bins_x; ++ix) {
      for (int iy = 0; iy < sys.bins_y; ++iy) {
        const double ox = std::min(pos[i].x + in.width, (ix + 1) * sys.bin_w) - std::max(pos[i].x, ix * sys.bin_w);
        const double oy = std::min(pos[i].y + in.height, (iy + 1) * sys.bin_h) - std::max(pos[i].y, iy * sys.bin_h);
        if (ox > 0 && oy > 0) g[iy + ix * sys.bins_y] += ox * oy;
      }
    }
  }
  return g;
}

double energy_at(ElectroSystem& sys, const Design& d, const std::vector<Point>& pos) {
  bin_density(sys, d, pos, {});
  solve_poisson(sys);
  return sys.energy;
}

}  // namespace

TEST_CASE("bin counts") {
  CHECK(choose_bin_count(0) == 16);
  CHECK(choose_bin_count(300) == 32);
  CHECK(choose_bin_count(1024) == 32);
  CHECK(choose_bin_count(1025) == 64);
  CHECK(choose_bin_count(10'000'000) == 512);
  CHECK_THROWS_AS(make_grid(ResourceType::LUT, 12, 16, 10, 10), ValidationError);
}

TEST_CASE("instance density by overlap") {
  ElectroSystem sys = make_grid(ResourceType::DSP, 16, 16, 16, 16);
  Design d;
  d.instances.push_back(box("a", ResourceType::DSP, 1, 1));
  bin_density(sys, d, std::vector<Point>{{3, 5}}, {});
  CHECK(sys.inst_density[sys.at(3, 5)] == 1.0);
  CHECK(sum(sys.inst_density) == 1.0);

  bin_density(sys, d, std::vector<Point>{{3.5, 5}}, {});
  CHECK(sys.inst_density[sys.at(3, 5)] == 0.5);
  CHECK(sys.inst_density[sys.at(4, 5)] == 0.5);
}

TEST_CASE("density conserves area and ignores order") {
  Rng rng(2);
  ElectroSystem sys = make_grid(ResourceType::LUT, 32, 32, 40, 60);
  Design d;
  std::vector<Point> pos;
  for (int i = 0; i < 300; ++i) {
    d.instances.push_back(box("i" + std::to_string(i), i % 5 ? ResourceType::LUT : ResourceType::FF, rng.uniform(0.2, 3),
                              rng.uniform(0.2, 3)));
    pos.push_back({rng.uniform(0, 40 - d.instances.back().width), rng.uniform(0, 60 - d.instances.back().height)});
  }
  std::vector<Point> fillers;
  for (int i = 0; i < 50; ++i) fillers.push_back({rng.uniform(0, 38), rng.uniform(0, 58)});
  sys.filler_side = 2;
  bin_density(sys, d, pos, fillers);
  double area = 0;
  for (const auto& in : d.instances) area += in.resource == ResourceType::LUT ? in.area() : 0.0;
  CHECK(testing::rel_err(sum(sys.inst_density), area) < 1e-12);
  CHECK(testing::rel_err(sum(sys.density), area + 50 * 4) < 1e-12);

  const auto oracle = overlap_oracle(sys, d, pos);
  for (std::size_t b = 0; b < sys.size(); ++b) CHECK(sys.inst_density[b] == doctest::Approx(oracle[b]).epsilon(1e-12));

  const std::vector<double> before = sys.density;
  std::reverse(d.instances.begin(), d.instances.end());
  std::reverse(pos.begin(), pos.end());
  bin_density(sys, d, pos, fillers);
  for (std::size_t b = 0; b < sys.size(); ++b) CHECK(sys.density[b] == doctest::Approx(before[b]).epsilon(1e-12));
}

TEST_CASE("fillers balance the charge") {
  const Benchmark b = generate_benchmark(2, Profile::Tiny);
  Rng rng(4);
  std::vector<Point> pos;
  for (const auto& in : b.design.instances)
    pos.push_back(in.fixed ? in.fixed_pos : Point{rng.uniform(0, 40 - in.width), rng.uniform(0, 60 - in.height)});
  for (auto r : kPlaceableResources) {
    ElectroSystem sys = make_system(b.layout, b.design, r);
    CHECK(sys.filler_count >= 64);
    const auto fillers = seed_fillers(sys, b.layout, rng);
    bin_density(sys, b.design, pos, fillers);
    CHECK(testing::rel_err(sum(sys.density), sum(sys.capacity)) < 1e-9);
    CHECK(testing::rel_err(sum(sys.charge_capacity), sum(sys.capacity)) < 1e-9);
  }
}

TEST_CASE("poisson solve") {
  SUBCASE("uniform charge has no field") {
    ElectroSystem sys = make_grid(ResourceType::LUT, 16, 16, 16, 16);
    std::fill(sys.density.begin(), sys.density.end(), 3.0);
    solve_poisson(sys);
    for (std::size_t b = 0; b < sys.size(); ++b) {
      CHECK(std::abs(sys.potential[b] - sys.potential[0]) < 1e-12);
      CHECK(std::abs(sys.field_x[b]) < 1e-12);
      CHECK(std::abs(sys.field_y[b]) < 1e-12);
    }
    CHECK(std::abs(sys.energy) < 1e-9);
  }

  SUBCASE("discrete laplacian of the potential returns the charge") {
    Rng rng(3);
    ElectroSystem sys = make_grid(ResourceType::DSP, 64, 64, 64, 64);
    for (auto& v : sys.density) v = rng.uniform(0, 1);
    solve_poisson(sys);
    const double mean = sum(sys.density) / static_cast<double>(sys.size());
    double num = 0, den = 0;
    auto psi = [&](int i, int j) { return sys.potential[sys.at(std::clamp(i, 0, 63), std::clamp(j, 0, 63))]; };
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < 64; ++j) {
        const double lap = psi(i + 1, j) + psi(i - 1, j) + psi(i, j + 1) + psi(i, j - 1) - 4 * psi(i, j);
        const double rho = sys.density[sys.at(i, j)] - mean;
        num += (lap + rho) * (lap + rho);
        den += rho * rho;
      }
    }
    CHECK(std::sqrt(num / den) < 1e-6);
    CHECK(sys.energy > 0);
  }

  SUBCASE("centered charge gives an antisymmetric field") {
    ElectroSystem sys = make_grid(ResourceType::DSP, 32, 32, 32, 32);
    for (int i = 15; i <= 16; ++i)
      for (int j = 15; j <= 16; ++j) sys.density[sys.at(i, j)] = 1;
    solve_poisson(sys);
    for (int i = 0; i < 32; ++i) {
      for (int j = 0; j < 32; ++j) {
        CHECK(sys.field_x[sys.at(i, j)] == doctest::Approx(-sys.field_x[sys.at(31 - i, j)]).epsilon(1e-9).scale(1));
        CHECK(sys.field_y[sys.at(i, j)] == doctest::Approx(-sys.field_y[sys.at(i, 31 - j)]).epsilon(1e-9).scale(1));
      }
    }
    // field points away from the charge
    CHECK(sys.field_x[sys.at(20, 16)] > 0);
    CHECK(sys.field_x[sys.at(10, 16)] < 0);
  }

  SUBCASE("energy is nonnegative and zero only for zero net charge") {
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
      ElectroSystem sys = make_grid(ResourceType::LUT, 16, 16, 10, 20);
      for (auto& v : sys.density) v = rng.uniform(0, 2);
      for (auto& v : sys.charge_capacity) v = rng.uniform(0, 2);
      solve_poisson(sys);
      CHECK(sys.energy > 1e-9);
    }
    ElectroSystem sys = make_grid(ResourceType::LUT, 16, 16, 10, 20);
    for (std::size_t b = 0; b < sys.size(); ++b) sys.density[b] = sys.charge_capacity[b] = 0.25 * static_cast<double>(b % 7);
    solve_poisson(sys);
    CHECK(std::abs(sys.energy) < 1e-9);
  }

  SUBCASE("shifting a compact pattern shifts its field") {
    auto field_of = [](int cx) {
      ElectroSystem sys = make_grid(ResourceType::LUT, 128, 128, 128, 128);
      sys.density[sys.at(cx, 64)] = 1;
      sys.charge_capacity[sys.at(cx + 1, 64)] = 1;
      solve_poisson(sys);
      return sys;
    };
    const ElectroSystem a = field_of(60), b = field_of(61);
    for (int dx = -3; dx <= 3; ++dx) {
      for (int dy = -3; dy <= 3; ++dy) {
        const double fa = a.field_x[a.at(60 + dx, 64 + dy)], fb = b.field_x[b.at(61 + dx, 64 + dy)];
        CHECK(std::abs(fa - fb) <= 1e-2 * std::abs(fa) + 1e-6);
      }
    }
  }
}

TEST_CASE("energy gradient") {
  SUBCASE("mirror-image pair gets opposite forces") {
    ElectroSystem sys = make_grid(ResourceType::DSP, 32, 32, 32, 32);
    Design d;
    d.instances.push_back(box("a", ResourceType::DSP, 2, 3));
    d.instances.push_back(box("b", ResourceType::DSP, 2, 3));
    // mirrored through the chip center (16, 16)
    const std::vector<Point> pos{{14.3, 14.1}, {32 - 14.3 - 2, 32 - 14.1 - 3}};
    energy_at(sys, d, pos);
    const auto g = density_gradient(sys, d, pos);
    CHECK(std::abs(g[0].x + g[1].x) < 1e-9);
    CHECK(std::abs(g[0].y + g[1].y) < 1e-9);
    CHECK(g[0].x > 0);  // descent moves a left and down, away from b
  }

  SUBCASE("descent points away from a charge cluster") {
    ElectroSystem sys = make_grid(ResourceType::DSP, 32, 32, 64, 64);
    Design d;
    std::vector<Point> pos;
    for (int i = 0; i < 20; ++i) {
      d.instances.push_back(box("c" + std::to_string(i), ResourceType::DSP, 4, 4));
      pos.push_back({44 + 0.3 * i, 44 + 0.2 * i});
    }
    d.instances.push_back(box("lone", ResourceType::DSP, 1, 1));
    pos.push_back({12, 14});
    energy_at(sys, d, pos);
    const Point g = density_gradient(sys, d, pos).back();
    const Point away{12.5 - 48, 14.5 - 48};
    CHECK(-g.x * away.x - g.y * away.y > 0);
  }

  SUBCASE("other resources and fixed instances get zero") {
    ElectroSystem sys = make_grid(ResourceType::DSP, 16, 16, 16, 16);
    Design d;
    d.instances.push_back(box("a", ResourceType::DSP, 1, 2));
    d.instances.push_back(box("b", ResourceType::LUT, 0.5, 0.5));
    d.instances.push_back(box("c", ResourceType::DSP, 1, 2));
    d.instances[2].fixed = true;
    const std::vector<Point> pos{{3, 3}, {3.2, 3.1}, {4, 3}};
    energy_at(sys, d, pos);
    const auto g = density_gradient(sys, d, pos);
    CHECK(g[1] == Point{0, 0});
    CHECK(g[2] == Point{0, 0});
    CHECK(g[0] != Point{0, 0});
  }

  SUBCASE("matches central differences of the energy") {
    Rng rng(13);
    for (int t = 0; t < 20; ++t) {
      const ResourceType r = t % 2 ? ResourceType::LUT : ResourceType::DSP;
      ElectroSystem sys = make_grid(r, 32, 32, 64, 64);
      for (auto& v : sys.charge_capacity) v = rng.uniform(0, 3);
      Design d;
      std::vector<Point> pos;
      for (int i = 0; i < 12; ++i) {
        d.instances.push_back(box("i" + std::to_string(i), r, rng.uniform(0.3, 8), rng.uniform(0.3, 8)));
        pos.push_back({rng.uniform(0, 56), rng.uniform(0, 56)});
      }
      energy_at(sys, d, pos);
      const auto g = density_gradient(sys, d, pos);
      double num = 0, den = 0;
      const double h = 1e-4;
      for (std::size_t i = 0; i < pos.size(); ++i) {
        for (int axis = 0; axis < 2; ++axis) {
          auto a = pos, b = pos;
          (axis ? a[i].y : a[i].x) += h;
          (axis ? b[i].y : b[i].x) -= h;
          const double fd = (energy_at(sys, d, a) - energy_at(sys, d, b)) / (2 * h);
          const double an = axis ? g[i].y : g[i].x;
          num += (an - fd) * (an - fd);
          den += fd * fd;
        }
      }
      CHECK(std::sqrt(num / den) < 1e-2);
    }
  }
}

TEST_CASE("overflow") {
  ElectroSystem sys = make_grid(ResourceType::LUT, 16, 16, 16, 16);
  sys.movable_area = 1;
  std::fill(sys.capacity.begin(), sys.capacity.end(), 1.0);
  std::fill(sys.inst_density.begin(), sys.inst_density.end(), 0.5);
  CHECK(overflow(sys) == 0);
  sys.inst_density[sys.at(2, 2)] = 2;
  CHECK(overflow(sys) == 1.0);
  sys.movable_area = 0;
  CHECK(overflow(sys) == 0);

  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    ElectroSystem s = make_grid(ResourceType::LUT, 16, 16, 20, 20);
    for (auto& v : s.capacity) v = rng.uniform(0, 1.5);
    Design d;
    std::vector<Point> pos;
    double area = 0;
    for (int i = 0; i < 80; ++i) {
      d.instances.push_back(box("i", ResourceType::LUT, rng.uniform(0.3, 2), rng.uniform(0.3, 2)));
      pos.push_back({rng.uniform(0, 18), rng.uniform(0, 18)});
      area += d.instances.back().area();
    }
    s.movable_area = area;
    bin_density(s, d, pos, {});
    const auto o = overlap_oracle(s, d, pos);
    double over = 0;
    for (std::size_t b = 0; b < s.size(); ++b) over += std::max(0.0, o[b] - s.capacity[b]);
    CHECK(overflow(s) == doctest::Approx(over / area).epsilon(1e-12));
  }
}
