#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mplace/types.hpp"

namespace mplace {

enum class Profile { Tiny, Small, Medium };

std::optional<Profile> parse_profile(std::string_view s);
std::string_view to_string(Profile p);

struct Benchmark {
  FpgaLayout layout;
  Design design;
};

/// UltraScale+-like fabric: IO columns at both edges, CLB columns with interleaved DSP and BRAM columns.
/// `grid_h` must be a multiple of 10 so every site height tiles it.
FpgaLayout make_columnar_layout(int grid_w, int grid_h);

/**
 * @brief Deterministic synthetic benchmark for a (seed, profile) pair.
 *
 * The result satisfies `feasibility_problems(...) == ""` and keeps every resource at or below 90%
 * of capacity and every region at or below 95% of its capacity.
 */
Benchmark generate_benchmark(std::uint64_t seed, Profile profile);

/**
 * @brief Small design with one crowded region filled to at least 95% by full-column cascades
 * and single macros. Used to stress global placement rollback.
 */
Benchmark generate_contention_benchmark(std::uint64_t seed);

/// Capacity-counting pre-scan. Returns an empty string when every cascade fits some column
/// (inside its region when constrained) and every region can host its demand per resource.
std::string feasibility_problems(const FpgaLayout& layout, const Design& design);

}  // namespace mplace
