#include "mplace/cascade.hpp"

#include <algorithm>

namespace mplace {

MergeResult merge_cascades(const Design& design, const FpgaLayout& layout) {
  design.validate(layout);
  const int n = static_cast<int>(design.instances.size());

  MergeResult out;
  out.origin.assign(n, MergedRef{});
  std::vector<int> owner(n, -1);
  for (std::size_t s = 0; s < design.shapes.size(); ++s) {
    for (int m : design.shapes[s].members) owner[m] = static_cast<int>(s);
  }

  Design& merged = out.design;
  merged.regions = design.regions;
  for (int i = 0; i < n; ++i) {
    if (owner[i] >= 0) continue;
    out.origin[i] = MergedRef{static_cast<int>(merged.instances.size()), 0};
    merged.instances.push_back(design.instances[i]);
    merged.instances.back().shape = -1;
  }
  out.cascade_of.assign(merged.instances.size(), -1);

  for (std::size_t s = 0; s < design.shapes.size(); ++s) {
    const auto& shape = design.shapes[s];
    if (design.find_instance(shape.id) >= 0)
      throw ValidationError("shape '" + shape.id + "' shares its name with an instance");
    const auto& first = design.instances[shape.members.front()];
    for (int m : shape.members) {
      if (design.instances[m].fixed) throw ValidationError("shape '" + shape.id + "' has a fixed member");
    }

    Instance unit;
    unit.name = shape.id;
    unit.resource = shape.resource;
    unit.demand = static_cast<int>(shape.members.size());
    unit.region = first.region;
    unit.shape = static_cast<int>(s);
    size_instance(unit, layout);

    MergedCascade mc;
    mc.merged_inst = static_cast<int>(merged.instances.size());
    mc.shape = static_cast<int>(s);
    mc.members = shape.members;
    mc.member_height = unit.height / unit.demand;
    for (std::size_t o = 0; o < shape.members.size(); ++o)
      out.origin[shape.members[o]] = MergedRef{mc.merged_inst, static_cast<int>(o)};

    out.cascade_of.push_back(static_cast<int>(out.cascades.size()));
    merged.instances.push_back(std::move(unit));
    out.cascades.push_back(std::move(mc));
  }

  merged.nets.reserve(design.nets.size());
  for (const auto& net : design.nets) {
    Net rehomed{net.name, {}};
    rehomed.pins.reserve(net.pins.size());
    for (const auto& p : net.pins) {
      const auto& ref = out.origin[p.inst];
      double shift = 0.0;
      if (int c = out.cascade_of[ref.inst]; c >= 0) shift = ref.ordinal * out.cascades[c].member_height;
      rehomed.pins.push_back(Pin{ref.inst, p.dx, p.dy + shift});
    }
    merged.nets.push_back(std::move(rehomed));
  }
  merged.reindex();
  return out;
}

std::vector<Point> expand_positions(const MergeResult& merge, std::span<const Point> merged) {
  std::vector<Point> out(merge.origin.size());
  for (std::size_t i = 0; i < merge.origin.size(); ++i) {
    const auto& ref = merge.origin[i];
    Point p = merged[ref.inst];
    if (int c = merge.cascade_of[ref.inst]; c >= 0) p.y += ref.ordinal * merge.cascades[c].member_height;
    out[i] = p;
  }
  return out;
}

std::vector<Point> collapse_positions(const MergeResult& merge, std::span<const Point> original) {
  if (original.size() != merge.origin.size()) throw ValidationError("placement does not cover the design");
  std::vector<Point> out(merge.design.instances.size());
  for (std::size_t i = 0; i < merge.origin.size(); ++i) {
    if (merge.origin[i].ordinal == 0) out[merge.origin[i].inst] = original[i];
  }
  return out;
}

Placement expand_placement(const MergeResult& merge, const Placement& merged) {
  Placement out;
  out.positions = expand_positions(merge, merged.positions);
  out.legal.resize(merge.origin.size());
  for (std::size_t i = 0; i < merge.origin.size(); ++i) out.legal[i] = merged.legal[merge.origin[i].inst];
  return out;
}

}  // namespace mplace
