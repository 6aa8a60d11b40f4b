#include "mplace/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mplace {

namespace {
constexpr std::array<std::string_view, kNumResources> kResourceNames = {"LUT", "FF", "DSP", "BRAM", "IO"};
}

std::string_view to_string(ResourceType r) { return kResourceNames[index_of(r)]; }

std::optional<ResourceType> parse_resource(std::string_view s) {
  for (auto r : kAllResources) {
    if (kResourceNames[index_of(r)] == s) return r;
  }
  return std::nullopt;
}

FpgaLayout::FpgaLayout(int grid_w, int grid_h, std::vector<SiteType> site_types, std::vector<int> column_types)
    : grid_w_(grid_w), grid_h_(grid_h), site_types_(std::move(site_types)), column_types_(std::move(column_types)) {
  if (grid_w_ <= 0 || grid_h_ <= 0) throw ValidationError("grid dimensions must be positive");
  if (static_cast<int>(column_types_.size()) != grid_w_) throw ValidationError("column table size mismatch");
  for (const auto& st : site_types_) {
    if (st.width < 1 || st.height < 1) throw ValidationError("site type '" + st.name + "' has a non-positive size");
    if (std::none_of(st.capacity.begin(), st.capacity.end(), [](int c) { return c > 0; }))
      throw ValidationError("site type '" + st.name + "' hosts no resource");
    if (std::any_of(st.capacity.begin(), st.capacity.end(), [](int c) { return c < 0; }))
      throw ValidationError("site type '" + st.name + "' has a negative capacity");
  }
  std::vector<int> cover(grid_w_, 0);
  for (int x = 0; x < grid_w_; ++x) {
    int t = column_types_[x];
    if (t < 0) continue;
    if (t >= static_cast<int>(site_types_.size())) throw ValidationError("column references unknown site type");
    const auto& st = site_types_[t];
    if (grid_h_ % st.height != 0)
      throw ValidationError("height does not tile column " + std::to_string(x) + " (site '" + st.name + "')");
    if (x + st.width > grid_w_) throw ValidationError("column " + std::to_string(x) + " extends past the grid");
    for (int dx = 0; dx < st.width; ++dx) ++cover[x + dx];
  }
  for (int x = 0; x < grid_w_; ++x) {
    if (cover[x] != 1)
      throw ValidationError("column " + std::to_string(x) + (cover[x] == 0 ? " has no site type" : " is covered twice"));
  }
}

const SiteType* FpgaLayout::column_site(int x) const {
  if (x < 0 || x >= grid_w_) return nullptr;
  int t = column_types_[x];
  return t < 0 ? nullptr : &site_types_[t];
}

int FpgaLayout::sites_in_column(int x) const {
  const auto* st = column_site(x);
  return st ? grid_h_ / st->height : 0;
}

Rect FpgaLayout::site_rect(SiteId s) const {
  const auto* st = column_site(s.x);
  if (!st) return {};
  return Rect{double(s.x), double(s.k * st->height), double(s.x + st->width), double((s.k + 1) * st->height)};
}

int FpgaLayout::find_site_type(std::string_view name) const {
  for (std::size_t i = 0; i < site_types_.size(); ++i) {
    if (site_types_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int FpgaLayout::host_type(ResourceType r) const {
  for (std::size_t i = 0; i < site_types_.size(); ++i) {
    if (site_types_[i].capacity_of(r) > 0) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> FpgaLayout::columns_hosting(ResourceType r) const {
  std::vector<int> cols;
  for (int x = 0; x < grid_w_; ++x) {
    const auto* st = column_site(x);
    if (st && st->capacity_of(r) > 0) cols.push_back(x);
  }
  return cols;
}

bool Region::contains(const Rect& box) const {
  constexpr double eps = 1e-9;
  return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) {
    return r.xl - eps <= box.xl && box.xh <= r.xh + eps && r.yl - eps <= box.yl && box.yh <= r.yh + eps;
  });
}

int Design::find_instance(std::string_view name) const {
  if (by_name_.size() != instances.size()) {
    by_name_.clear();
    for (std::size_t i = 0; i < instances.size(); ++i) by_name_.emplace(instances[i].name, static_cast<int>(i));
  }
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? -1 : it->second;
}

int Design::find_region(std::string_view id) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

void Design::reindex() {
  by_name_.clear();
  by_name_.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) by_name_.emplace(instances[i].name, static_cast<int>(i));
}

void Design::validate(const FpgaLayout& layout) const {
  const int n = static_cast<int>(instances.size());
  std::set<std::string> names;
  for (const auto& inst : instances) {
    if (!names.insert(inst.name).second) throw ValidationError("duplicate instance '" + inst.name + "'");
    if (layout.host_type(inst.resource) < 0)
      throw ValidationError("instance '" + inst.name + "': no site type hosts " + std::string(to_string(inst.resource)));
    if (inst.resource == ResourceType::IO && !inst.fixed)
      throw ValidationError("IO instance '" + inst.name + "' must be fixed");
    if (inst.region >= static_cast<int>(regions.size()))
      throw ValidationError("instance '" + inst.name + "' references an unknown region");
    if (inst.demand < 1) throw ValidationError("instance '" + inst.name + "' has non-positive demand");
  }
  for (const auto& region : regions) {
    if (region.rects.empty()) throw ValidationError("region '" + region.id + "' has no rectangles");
    for (const auto& r : region.rects) {
      if (!(r.xl < r.xh && r.yl < r.yh))
        throw ValidationError("region '" + region.id + "' has a degenerate rectangle");
      if (r.xl < 0 || r.yl < 0 || r.xh > layout.grid_w() || r.yh > layout.grid_h())
        throw ValidationError("region '" + region.id + "' extends past the chip");
    }
  }
  for (const auto& net : nets) {
    if (net.pins.empty()) throw ValidationError("net '" + net.name + "' has no pins");
    for (const auto& p : net.pins) {
      if (p.inst < 0 || p.inst >= n) throw ValidationError("net '" + net.name + "' references a missing instance");
    }
  }
  std::vector<int> owner(n, -1);
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const auto& shape = shapes[s];
    if (!is_macro(shape.resource)) throw ValidationError("shape '" + shape.id + "' is not a macro shape");
    if (shape.members.size() < 2) throw ValidationError("shape '" + shape.id + "' needs at least two members");
    int region = -2;
    for (int m : shape.members) {
      if (m < 0 || m >= n) throw ValidationError("shape '" + shape.id + "' has a missing member");
      if (instances[m].resource != shape.resource)
        throw ValidationError("shape '" + shape.id + "' mixes resource types");
      if (owner[m] >= 0) throw ValidationError("shape '" + shape.id + "' reuses member '" + instances[m].name + "'");
      owner[m] = static_cast<int>(s);
      if (region == -2) region = instances[m].region;
      if (instances[m].region != region)
        throw ValidationError("shape '" + shape.id + "' members disagree on region");
    }
  }
}

void size_instance(Instance& inst, const FpgaLayout& layout) {
  int t = layout.host_type(inst.resource);
  if (t < 0) throw ValidationError("no site type hosts " + std::string(to_string(inst.resource)));
  const auto& st = layout.site_types()[t];
  if (is_macro(inst.resource)) {
    inst.width = st.width;
    inst.height = double(st.height) * inst.demand;
  } else {
    double side = std::sqrt(double(st.width) * st.height / st.capacity_of(inst.resource));
    inst.width = side;
    inst.height = side;
  }
}

Point clamp_to_chip(Point p, double w, double h, const FpgaLayout& layout) {
  p.x = std::min(std::max(p.x, 0.0), std::max(0.0, layout.grid_w() - w));
  p.y = std::min(std::max(p.y, 0.0), std::max(0.0, layout.grid_h() - h));
  return p;
}

}  // namespace mplace
