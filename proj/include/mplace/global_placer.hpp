#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mplace/density.hpp"
#include "mplace/types.hpp"

namespace mplace {

struct GpConfig {
  int max_iters = 1000;
  double ovfl_stop_nonmacro = 0.1;
  double ovfl_stop_macro = 0.2;
  double lambda_growth = 1.05;
  std::uint64_t seed = 1;
  int checkpoint_every = 50;
  int divergence_window = 100;
  double divergence_factor = 2.0;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

struct GpIterRecord {
  int iter = 0;
  double hpwl = 0.0;
  double wa = 0.0;
  std::array<double, 4> phi{};
  std::array<double, 4> lambda{};
  std::array<double, 4> ovfl{};
  double gamma = 0.0;
};

struct GpTrace {
  std::vector<GpIterRecord> records;
  bool converged = false;
  bool rolled_back = false;
  int best_checkpoint_iter = 0;

  /// `iter,hpwl,wa,phi_*,lambda_*,ovfl_*,gamma` rows, then a `# status` line.
  std::string to_csv() const;
};

struct Checkpoint {
  PlacementState state;
  std::array<double, 4> lambda{};
  double gamma = 0.0;
  int iteration = 0;
  double macro_overflow = 0.0;
  double hpwl = 0.0;
};

/**
 * @brief Movable instances start at the chip center, or at the center of their region's
 * nearest rectangle, plus seeded jitter of up to two bin widths. Fixed instances sit at their
 * fixed positions; fillers are spread uniformly.
 */
PlacementState init_placement(const FpgaLayout& layout, const Design& design, std::uint64_t seed);

/**
 * @brief One global placement session on a merged design.
 *
 * Minimizes WA wirelength plus sum_s lambda_s * (Phi_s + c_s * Phi_s^2) with Nesterov's method and a
 * Lipschitz step estimate. After every step region-constrained instances are clamped into their
 * regions and everything into the chip; each lambda_s grows by the configured factor.
 */
class GlobalPlacer {
 public:
  GlobalPlacer(const FpgaLayout& layout, const Design& design, const GpConfig& config);

  /// Advances one iteration. Returns false when a non-finite value appeared.
  bool step();

  const PlacementState& state() const { return state_; }
  const std::array<ElectroSystem, 4>& systems() const { return systems_; }
  std::array<double, 4> overflows() const { return ovfl_; }
  double macro_overflow() const { return std::max(ovfl_[2], ovfl_[3]); }
  double gamma() const { return gamma_; }
  bool converged() const;
  GpIterRecord record() const;
  Checkpoint checkpoint() const;

 private:
  using Vec = std::vector<Point>;

  void pack(const PlacementState& s, Vec& x) const;
  void unpack(const Vec& x, PlacementState& s) const;
  /// Preconditioned gradient at x; refreshes densities, energies and overflows.
  Vec gradient(const Vec& x);
  void project(Vec& x) const;
  void update_gamma();
  /// Barzilai-Borwein step over all movable variables.
  double step_estimate(const Vec& x0, const Vec& g0, const Vec& x1, const Vec& g1) const;

  const FpgaLayout& layout_;
  const Design& design_;
  GpConfig config_;
  std::array<ElectroSystem, 4> systems_;
  std::array<std::size_t, 5> offset_{};  ///< start of instances, then of each filler block
  std::vector<double> pins_;
  std::vector<char> moves_;  ///< false for fixed instances
  PlacementState state_;
  std::array<double, 4> ovfl_{};
  double gamma_ = 1.0;
  double wa_ = 0.0;

  Vec u_, v_, g_;
  double a_ = 1.0;
  double alpha_ = 0.0;
};

struct GpResult {
  PlacementState state;
  GpTrace trace;
};

/// Iterates until the overflow targets are met, max_iters is reached, or divergence forces a rollback.
GpResult run_global_placement(const FpgaLayout& layout, const Design& design, const GpConfig& config);

}  // namespace mplace
