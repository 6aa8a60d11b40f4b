#pragma once

#include <span>
#include <vector>

#include "mplace/rng.hpp"
#include "mplace/types.hpp"

namespace mplace {

/**
 * @brief Electrostatic model of one resource type on a uniform bin grid.
 *
 * Site capacity acts as negative charge, instance and filler area as positive charge.
 * All grids are stored row-major as [ix * bins_y + iy] and hold area per bin.
 */
struct ElectroSystem {
  ResourceType resource = ResourceType::LUT;
  int bins_x = 0;
  int bins_y = 0;
  double bin_w = 1.0;
  double bin_h = 1.0;

  std::vector<double> capacity;         ///< site area per bin, used for overflow
  std::vector<double> charge_capacity;  ///< negative charge: site area, spread like the charge for LUT and FF
  std::vector<double> density;          ///< charge of instances plus fillers
  std::vector<double> inst_density;     ///< instance overlap, used for overflow
  std::vector<double> potential;
  std::vector<double> field_x;
  std::vector<double> field_y;

  double energy = 0.0;
  double lambda = 0.0;
  double c_quad = 1.0;

  double movable_area = 0.0;
  double filler_side = 0.0;
  int filler_count = 0;

  std::size_t size() const { return static_cast<std::size_t>(bins_x) * bins_y; }
  std::size_t at(int ix, int iy) const { return static_cast<std::size_t>(ix) * bins_y + iy; }
};

/// Smallest power of two >= sqrt(n), clamped to [16, 512].
int choose_bin_count(std::size_t n);

/// Empty system of `bins_x` x `bins_y` bins over the chip, without capacity.
ElectroSystem make_grid(ResourceType r, int bins_x, int bins_y, double chip_w, double chip_h);

/**
 * @brief System for resource `r`: bin grid, site capacity, and filler sizing.
 *
 * Fillers make the total charge neutral: (capacity - instance area) is split into
 * max(64, #instances) squares. No fillers are created when there is no slack.
 */
ElectroSystem make_system(const FpgaLayout& layout, const Design& design, ResourceType r);

/// Uniform filler positions inside the chip.
std::vector<Point> seed_fillers(const ElectroSystem& sys, const FpgaLayout& layout, Rng& rng);

/// Adds `weight` times the overlap of `box` with each bin.
void deposit(ElectroSystem& sys, std::vector<double>& grid, const Rect& box, double weight = 1.0);

/**
 * @brief Recomputes both density grids from the instances of the system's resource and its fillers.
 *
 * `inst_density` holds the geometric overlap of instance footprints. `density` is the charge: each
 * box (instances and fillers) is spread with smooth bin weights, so the energy is continuously
 * differentiable in the positions. Both conserve area.
 */
void bin_density(ElectroSystem& sys, const Design& design, std::span<const Point> positions,
                 std::span<const Point> fillers);

/// Solves for potential and field from (density - charge_capacity) and updates the energy.
void solve_poisson(ElectroSystem& sys);

/// Gradient of the energy with respect to the lower-left corner of a w x h box at `pos`.
Point box_gradient(const ElectroSystem& sys, Point pos, double w, double h);

/// Energy gradient per instance; zeros for fixed instances and other resources.
std::vector<Point> density_gradient(const ElectroSystem& sys, const Design& design, std::span<const Point> positions);
std::vector<Point> filler_gradient(const ElectroSystem& sys, std::span<const Point> fillers);

/// Sum over bins of instance density above capacity, relative to the movable area.
double overflow(const ElectroSystem& sys);

}  // namespace mplace
