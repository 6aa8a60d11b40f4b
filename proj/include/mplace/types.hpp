#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mplace {

enum class ResourceType : std::uint8_t { LUT = 0, FF = 1, DSP = 2, BRAM = 3, IO = 4 };

inline constexpr int kNumResources = 5;
inline constexpr std::array<ResourceType, kNumResources> kAllResources = {
    ResourceType::LUT, ResourceType::FF, ResourceType::DSP, ResourceType::BRAM, ResourceType::IO};
/// Resources that get an electrostatic system during global placement.
inline constexpr std::array<ResourceType, 4> kPlaceableResources = {
    ResourceType::LUT, ResourceType::FF, ResourceType::DSP, ResourceType::BRAM};

inline constexpr int index_of(ResourceType r) { return static_cast<int>(r); }
inline constexpr bool is_macro(ResourceType r) { return r == ResourceType::DSP || r == ResourceType::BRAM; }

std::string_view to_string(ResourceType r);
std::optional<ResourceType> parse_resource(std::string_view s);

/// Thrown for malformed or inconsistent problem data.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a legalization phase or region clamp cannot be satisfied.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Rect {
  double xl = 0.0;
  double yl = 0.0;
  double xh = 0.0;
  double yh = 0.0;

  double width() const { return xh - xl; }
  double height() const { return yh - yl; }
  bool contains(const Rect& o) const { return xl <= o.xl && o.xh <= xh && yl <= o.yl && o.yh <= yh; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct SiteType {
  std::string name;
  int width = 1;
  int height = 1;
  std::array<int, kNumResources> capacity{};

  int capacity_of(ResourceType r) const { return capacity[index_of(r)]; }
  friend bool operator==(const SiteType&, const SiteType&) = default;
};

/// Identifies one site: the column it lives in and its index counted from y = 0.
struct SiteId {
  int x = 0;
  int k = 0;
  friend auto operator<=>(const SiteId&, const SiteId&) = default;
};

/**
 * @brief Column-based FPGA fabric. Each column holds one site type stacked from y = 0.
 */
class FpgaLayout {
 public:
  FpgaLayout() = default;
  FpgaLayout(int grid_w, int grid_h, std::vector<SiteType> site_types, std::vector<int> column_types);

  int grid_w() const { return grid_w_; }
  int grid_h() const { return grid_h_; }
  const std::vector<SiteType>& site_types() const { return site_types_; }
  /// Site-type index per column, -1 for an empty column.
  const std::vector<int>& column_types() const { return column_types_; }

  const SiteType* column_site(int x) const;
  int sites_in_column(int x) const;
  Rect site_rect(SiteId s) const;
  int find_site_type(std::string_view name) const;

  /// First declared site type able to host `r`, or -1.
  int host_type(ResourceType r) const;
  /// Columns whose site type hosts `r`, ascending.
  std::vector<int> columns_hosting(ResourceType r) const;

  friend bool operator==(const FpgaLayout&, const FpgaLayout&) = default;

 private:
  int grid_w_ = 0;
  int grid_h_ = 0;
  std::vector<SiteType> site_types_;
  std::vector<int> column_types_;
};

struct Instance {
  std::string name;
  ResourceType resource = ResourceType::LUT;
  int demand = 1;
  double width = 1.0;
  double height = 1.0;
  bool fixed = false;
  Point fixed_pos;
  int region = -1;
  int shape = -1;

  double area() const { return width * height; }
  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Pin {
  int inst = 0;
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const Pin&, const Pin&) = default;
};

struct Net {
  std::string name;
  std::vector<Pin> pins;
  friend bool operator==(const Net&, const Net&) = default;
};

struct CascadeShape {
  std::string id;
  ResourceType resource = ResourceType::DSP;
  std::vector<int> members;
  friend bool operator==(const CascadeShape&, const CascadeShape&) = default;
};

struct Region {
  std::string id;
  std::vector<Rect> rects;

  bool contains(const Rect& box) const;
  friend bool operator==(const Region&, const Region&) = default;
};

/**
 * @brief The placement problem: instances, nets, cascade shapes and regions.
 *
 * Instances reference regions and shapes by index. Net pins reference instances by index.
 */
struct Design {
  std::vector<Instance> instances;
  std::vector<Net> nets;
  std::vector<CascadeShape> shapes;
  std::vector<Region> regions;

  int find_instance(std::string_view name) const;
  int find_region(std::string_view id) const;
  /// Rebuilds the name lookup table; call after mutating `instances`.
  void reindex();
  /// Checks the cross-references and shape rules; throws ValidationError.
  void validate(const FpgaLayout& layout) const;

  friend bool operator==(const Design& a, const Design& b) {
    return a.instances == b.instances && a.nets == b.nets && a.shapes == b.shapes && a.regions == b.regions;
  }

 private:
  mutable std::unordered_map<std::string, int> by_name_;
};

/// Instance footprint derived from the hosting site type.
void size_instance(Instance& inst, const FpgaLayout& layout);

/**
 * @brief Continuous positions (lower-left corners) for every instance plus per-system fillers.
 */
struct PlacementState {
  std::vector<Point> positions;
  std::array<std::vector<Point>, 4> fillers;
  int iteration = 0;
  friend bool operator==(const PlacementState&, const PlacementState&) = default;
};

/// A placement as exchanged through files: positions plus a LEGAL tag per instance.
struct Placement {
  std::vector<Point> positions;
  std::vector<bool> legal;
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Lower-left of instance `i` clamped into the chip.
Point clamp_to_chip(Point p, double w, double h, const FpgaLayout& layout);

}  // namespace mplace
