#include "mplace/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mplace/rng.hpp"

namespace mplace {

namespace {

struct ProfileSpec {
  int grid_w, grid_h;
  int lut_lo, lut_hi;
  int dsp_lo, dsp_hi;
  int bram_lo, bram_hi;
  int io;
  int max_cascade_sizes;  // distinct sizes, starting at 2
  int shapes_lo, shapes_hi;  // per macro type
  int regions_lo, regions_hi;
  int tiles_x, tiles_y;
};

constexpr ProfileSpec spec_of(Profile p) {
  switch (p) {
    case Profile::Tiny: return {40, 60, 350, 500, 12, 24, 8, 14, 12, 3, 1, 2, 0, 3, 2, 2};
    case Profile::Small: return {80, 150, 3500, 5000, 60, 100, 30, 50, 40, 5, 3, 6, 2, 8, 3, 3};
    case Profile::Medium: return {100, 200, 9000, 24000, 120, 200, 60, 100, 80, 10, 8, 16, 8, 19, 5, 4};
  }
  return {};
}

enum SiteIdx { kClb = 0, kDsp = 1, kBram = 2, kIo = 3 };

struct RegionStats {
  std::array<long long, kNumResources> capacity{};  // instance slots fully inside
  std::array<int, kNumResources> longest_run{};     // consecutive in-region macro sites in one column
};

RegionStats region_stats(const FpgaLayout& layout, const Region& region) {
  RegionStats st;
  for (int x = 0; x < layout.grid_w(); ++x) {
    const SiteType* type = layout.column_site(x);
    if (!type || layout.column_types()[x] < 0) continue;
    int run = 0;
    for (int k = 0; k < layout.sites_in_column(x); ++k) {
      bool inside = region.contains(layout.site_rect(SiteId{x, k}));
      run = inside ? run + 1 : 0;
      for (auto r : kAllResources) {
        int cap = type->capacity_of(r);
        if (cap <= 0) continue;
        if (inside) st.capacity[index_of(r)] += cap;
        st.longest_run[index_of(r)] = std::max(st.longest_run[index_of(r)], run);
      }
    }
  }
  return st;
}

long long total_capacity(const FpgaLayout& layout, ResourceType r) {
  long long cap = 0;
  for (int x = 0; x < layout.grid_w(); ++x) {
    const SiteType* type = layout.column_site(x);
    if (type && layout.column_types()[x] >= 0) cap += static_cast<long long>(type->capacity_of(r)) * layout.sites_in_column(x);
  }
  return cap;
}

/// Incrementally assembles a design; every instance is sized against the layout on creation.
class Builder {
 public:
  Builder(const FpgaLayout& layout, Rng& rng) : layout_(layout), rng_(rng) {}

  int add(const std::string& name, ResourceType r, int region) {
    Instance inst;
    inst.name = name;
    inst.resource = r;
    inst.region = region;
    size_instance(inst, layout_);
    design.instances.push_back(std::move(inst));
    cluster_.push_back(-1);
    return static_cast<int>(design.instances.size()) - 1;
  }

  void fix(int i, Point p) {
    design.instances[i].fixed = true;
    design.instances[i].fixed_pos = p;
  }

  void add_shape(const std::string& id, ResourceType r, std::vector<int> members) {
    for (int m : members) design.instances[m].shape = static_cast<int>(design.shapes.size());
    design.shapes.push_back(CascadeShape{id, r, std::move(members)});
  }

  Pin pin_of(int i) {
    const auto& inst = design.instances[i];
    return Pin{i, inst.width / 2, inst.height / 2};
  }

  /// Connects instances into clustered nets. Region members cluster by region.
  void build_nets(int clusters) {
    const int n = static_cast<int>(design.instances.size());
    std::vector<std::vector<int>> members(clusters + design.regions.size());
    std::vector<int> io;
    for (int i = 0; i < n; ++i) {
      const auto& inst = design.instances[i];
      if (inst.resource == ResourceType::IO) {
        io.push_back(i);
        continue;
      }
      int c = inst.region >= 0 ? clusters + inst.region : static_cast<int>(rng_.below(clusters));
      cluster_[i] = c;
      members[c].push_back(i);
    }
    std::vector<int> movable;
    for (int i = 0; i < n; ++i) {
      if (cluster_[i] >= 0) movable.push_back(i);
    }
    if (movable.empty()) return;

    int net_id = 0;
    for (int i : movable) {
      const auto& group = members[cluster_[i]];
      double u = rng_.uniform();
      int degree = u < 0.5 ? 2 : u < 0.72 ? 3 : u < 0.85 ? 4 : u < 0.95 ? rng_.range(5, 6) : rng_.range(7, 12);
      Net net{"n" + std::to_string(net_id++), {pin_of(i)}};
      std::vector<int> used{i};
      for (int d = 1; d < degree; ++d) {
        int j;
        if (rng_.uniform() < 0.1 || group.size() < 2) {
          j = movable[rng_.below(movable.size())];
        } else {
          j = group[rng_.below(group.size())];
        }
        if (std::find(used.begin(), used.end(), j) != used.end()) continue;
        used.push_back(j);
        net.pins.push_back(pin_of(j));
      }
      design.nets.push_back(std::move(net));
    }
    for (int i : io) {
      auto& net = design.nets[rng_.below(design.nets.size())];
      net.pins.push_back(pin_of(i));
    }
    for (const auto& shape : design.shapes) {
      for (std::size_t o = 0; o + 1 < shape.members.size(); ++o) {
        design.nets.push_back(Net{shape.id + "_chain" + std::to_string(o),
                                  {pin_of(shape.members[o]), pin_of(shape.members[o + 1])}});
      }
    }
  }

  Design design;

 private:
  const FpgaLayout& layout_;
  Rng& rng_;
  std::vector<int> cluster_;
};

void place_io(Builder& b, const FpgaLayout& layout, int count, Rng& rng) {
  std::vector<Point> slots;
  for (int x : layout.columns_hosting(ResourceType::IO)) {
    for (int k = 0; k < layout.sites_in_column(x); ++k) slots.push_back(layout.site_rect(SiteId{x, k}).xl == x
                                                                             ? Point{double(x), layout.site_rect(SiteId{x, k}).yl}
                                                                             : Point{});
  }
  for (int i = 0; i < count && !slots.empty(); ++i) {
    std::size_t pick = rng.below(slots.size());
    int id = b.add("io" + std::to_string(i), ResourceType::IO, -1);
    b.fix(id, slots[pick]);
    slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(pick));
  }
}

std::vector<Region> make_regions(const FpgaLayout& layout, const ProfileSpec& spec, int count, Rng& rng) {
  const int tiles = spec.tiles_x * spec.tiles_y;
  std::vector<int> order(tiles);
  std::iota(order.begin(), order.end(), 0);
  for (int i = tiles - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  const double tw = double(layout.grid_w()) / spec.tiles_x;
  const double th = double(layout.grid_h()) / spec.tiles_y;
  auto tile_rect = [&](int t) {
    int tx = t % spec.tiles_x, ty = t / spec.tiles_x;
    // integer edges keep site containment unambiguous
    return Rect{std::floor(tx * tw), std::floor(ty * th), std::floor((tx + 1) * tw), std::floor((ty + 1) * th)};
  };
  std::vector<bool> used(tiles, false);
  std::vector<Region> regions;
  std::size_t next = 0;
  for (int r = 0; r < count && next < order.size(); ++r) {
    while (next < order.size() && used[order[next]]) ++next;
    if (next == order.size()) break;
    int t = order[next++];
    used[t] = true;
    Region region{"R" + std::to_string(r), {tile_rect(t)}};
    // some regions get a second, disjoint rectangle
    if (rng.uniform() < 0.2) {
      for (std::size_t j = next; j < order.size(); ++j) {
        if (!used[order[j]]) {
          used[order[j]] = true;
          region.rects.push_back(tile_rect(order[j]));
          break;
        }
      }
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

Benchmark try_generate(const ProfileSpec& spec, Rng& rng) {
  FpgaLayout layout = make_columnar_layout(spec.grid_w, spec.grid_h);
  Builder b(layout, rng);

  const int n_lut = rng.range(spec.lut_lo, spec.lut_hi);
  const int n_ff = rng.range(spec.lut_lo, spec.lut_hi);
  std::array<int, 2> n_macro = {rng.range(spec.dsp_lo, spec.dsp_hi), rng.range(spec.bram_lo, spec.bram_hi)};
  const std::array<ResourceType, 2> macro_types = {ResourceType::DSP, ResourceType::BRAM};
  const int n_regions = rng.range(spec.regions_lo, spec.regions_hi);

  b.design.regions = make_regions(layout, spec, n_regions, rng);
  std::vector<RegionStats> stats;
  for (const auto& r : b.design.regions) stats.push_back(region_stats(layout, r));

  place_io(b, layout, spec.io, rng);

  // LUT / FF: each region takes a share bounded by 40% of its capacity
  for (auto [r, count, prefix] : {std::tuple{ResourceType::LUT, n_lut, "lut"}, std::tuple{ResourceType::FF, n_ff, "ff"}}) {
    int made = 0;
    for (std::size_t g = 0; g < b.design.regions.size(); ++g) {
      long long budget = static_cast<long long>(0.4 * stats[g].capacity[index_of(r)]);
      int take = static_cast<int>(std::min<long long>(budget, static_cast<long long>(count * rng.uniform(0.01, 0.04))));
      for (int i = 0; i < take && made < count; ++i, ++made)
        b.add(std::string(prefix) + std::to_string(made), r, static_cast<int>(g));
    }
    for (; made < count; ++made) b.add(std::string(prefix) + std::to_string(made), r, -1);
  }

  // macros: cascades first, then singles; regions take whole shapes and singles up to half their capacity
  int shape_id = 0;
  for (int t = 0; t < 2; ++t) {
    const ResourceType r = macro_types[t];
    const std::string prefix = t == 0 ? "dsp" : "bram";
    int column_sites = 0;
    for (int x : layout.columns_hosting(r)) column_sites = std::max(column_sites, layout.sites_in_column(x));

    std::vector<int> sizes;
    int shapes = rng.range(spec.shapes_lo, spec.shapes_hi);
    int members_left = n_macro[t] / 2;
    for (int s = 0; s < shapes; ++s) {
      int size = s < spec.max_cascade_sizes ? 2 + s % spec.max_cascade_sizes : rng.range(2, 1 + spec.max_cascade_sizes);
      size = std::min(size, column_sites);
      if (size < 2 || size > members_left) continue;
      sizes.push_back(size);
      members_left -= size;
    }

    std::vector<long long> budget(b.design.regions.size());
    for (std::size_t g = 0; g < budget.size(); ++g)
      budget[g] = static_cast<long long>(0.5 * stats[g].capacity[index_of(r)] * rng.uniform(0.3, 1.0));

    int made = 0;
    auto make = [&](int region) { return b.add(prefix + std::to_string(made++), r, region); };
    for (int size : sizes) {
      int region = -1;
      for (std::size_t g = 0; g < budget.size(); ++g) {
        if (stats[g].longest_run[index_of(r)] >= size && budget[g] >= size && rng.uniform() < 0.35) {
          region = static_cast<int>(g);
          budget[g] -= size;
          break;
        }
      }
      std::vector<int> members;
      for (int i = 0; i < size; ++i) members.push_back(make(region));
      b.add_shape("cas" + std::to_string(shape_id++), r, std::move(members));
    }
    for (std::size_t g = 0; g < budget.size(); ++g) {
      long long singles = std::min<long long>(budget[g], (n_macro[t] - made) / 3);
      for (long long i = 0; i < singles && made < n_macro[t]; ++i) make(static_cast<int>(g));
    }
    while (made < n_macro[t]) make(-1);
  }

  int clusters = std::max(4, static_cast<int>(b.design.instances.size()) / 60);
  b.build_nets(clusters);
  b.design.reindex();
  return Benchmark{std::move(layout), std::move(b.design)};
}

bool within_global_budget(const Benchmark& bm) {
  std::array<double, kNumResources> demand{};
  for (const auto& inst : bm.design.instances) demand[index_of(inst.resource)] += inst.demand;
  for (auto r : kPlaceableResources) {
    if (demand[index_of(r)] > 0.9 * total_capacity(bm.layout, r)) return false;
  }
  return true;
}

}  // namespace

std::optional<Profile> parse_profile(std::string_view s) {
  if (s == "tiny") return Profile::Tiny;
  if (s == "small") return Profile::Small;
  if (s == "medium") return Profile::Medium;
  return std::nullopt;
}

std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::Tiny: return "tiny";
    case Profile::Small: return "small";
    case Profile::Medium: return "medium";
  }
  return "?";
}

FpgaLayout make_columnar_layout(int grid_w, int grid_h) {
  std::vector<SiteType> types(4);
  types[kClb] = SiteType{"CLB", 1, 1, {}};
  types[kClb].capacity[index_of(ResourceType::LUT)] = 8;
  types[kClb].capacity[index_of(ResourceType::FF)] = 16;
  types[kDsp] = SiteType{"DSP", 1, 2, {}};
  types[kDsp].capacity[index_of(ResourceType::DSP)] = 1;
  types[kBram] = SiteType{"BRAM", 1, 5, {}};
  types[kBram].capacity[index_of(ResourceType::BRAM)] = 1;
  types[kIo] = SiteType{"IO", 1, 1, {}};
  types[kIo].capacity[index_of(ResourceType::IO)] = 1;

  std::vector<int> columns(grid_w, kClb);
  columns.front() = kIo;
  columns.back() = kIo;
  for (int x = 1; x + 1 < grid_w; ++x) {
    int j = (x - 1) % 12;
    if (j == 5) columns[x] = kDsp;
    if (j == 10) columns[x] = kBram;
  }
  return FpgaLayout(grid_w, grid_h, std::move(types), std::move(columns));
}

Benchmark generate_benchmark(std::uint64_t seed, Profile profile) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(profile) + 1);
  const ProfileSpec spec = spec_of(profile);
  constexpr int kMaxTries = 16;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    Benchmark bm = try_generate(spec, rng);
    bm.design.validate(bm.layout);
    if (within_global_budget(bm) && feasibility_problems(bm.layout, bm.design).empty()) return bm;
  }
  throw std::runtime_error("benchmark generation did not reach a feasible instance");
}

Benchmark generate_contention_benchmark(std::uint64_t seed) {
  Rng rng(seed * 0xD1B54A32D192ED03ULL + 77);
  const int grid_h = 40 + 10 * static_cast<int>(rng.below(3));
  FpgaLayout layout = make_columnar_layout(40, grid_h);
  Builder b(layout, rng);

  // the region spans two DSP and two BRAM columns over the full height
  const bool left = rng.below(2) == 0;
  Rect box = left ? Rect{5, 0, 24, double(grid_h)} : Rect{17, 0, 36, double(grid_h)};
  b.design.regions.push_back(Region{"HOT", {box}});
  const RegionStats st = region_stats(layout, b.design.regions[0]);

  place_io(b, layout, 12, rng);
  for (auto [r, prefix] : {std::pair{ResourceType::LUT, "lut"}, std::pair{ResourceType::FF, "ff"}}) {
    int inside = static_cast<int>(0.3 * st.capacity[index_of(r)]);
    int total = inside + rng.range(200, 400);
    for (int i = 0; i < total; ++i) b.add(prefix + std::to_string(i), r, i < inside ? 0 : -1);
  }
  int shape_id = 0;
  for (auto [r, prefix] : {std::pair{ResourceType::DSP, "dsp"}, std::pair{ResourceType::BRAM, "bram"}}) {
    const int column = grid_h / layout.site_types()[layout.host_type(r)].height;
    const long long cap = st.capacity[index_of(r)];
    const int singles = static_cast<int>(std::ceil(0.95 * cap)) - column;
    int made = 0;
    std::vector<int> members;
    for (int i = 0; i < column; ++i) members.push_back(b.add(prefix + std::to_string(made++), r, 0));
    b.add_shape("cas" + std::to_string(shape_id++), r, std::move(members));
    for (int i = 0; i < singles; ++i) b.add(prefix + std::to_string(made++), r, 0);
    int outside = rng.range(3, 6);
    for (int i = 0; i < outside; ++i) b.add(prefix + std::to_string(made++), r, -1);
  }
  b.build_nets(6);
  b.design.reindex();
  b.design.validate(layout);
  return Benchmark{std::move(layout), std::move(b.design)};
}

std::string feasibility_problems(const FpgaLayout& layout, const Design& design) {
  std::string problems;
  std::vector<RegionStats> stats;
  for (const auto& r : design.regions) stats.push_back(region_stats(layout, r));

  for (const auto& shape : design.shapes) {
    const int size = static_cast<int>(shape.members.size());
    const int region = design.instances[shape.members.front()].region;
    int longest = 0;
    if (region >= 0) {
      longest = stats[region].longest_run[index_of(shape.resource)];
    } else {
      for (int x : layout.columns_hosting(shape.resource)) longest = std::max(longest, layout.sites_in_column(x));
    }
    if (longest < size) problems += "shape '" + shape.id + "' fits no column; ";
  }

  std::vector<std::array<long long, kNumResources>> demand(design.regions.size());
  for (const auto& inst : design.instances) {
    if (inst.region >= 0) demand[inst.region][index_of(inst.resource)] += inst.demand;
  }
  for (std::size_t g = 0; g < design.regions.size(); ++g) {
    for (auto r : kAllResources) {
      if (demand[g][index_of(r)] > stats[g].capacity[index_of(r)])
        problems += "region '" + design.regions[g].id + "' cannot host its " + std::string(to_string(r)) + "; ";
    }
  }
  return problems;
}

}  // namespace mplace
