#pragma once

#include <cstdint>
#include <vector>

namespace mplace {

struct Arc {
  int left = 0;
  int right = 0;
  std::int64_t cost = 0;  ///< nonnegative
};

/// Bipartite assignment: every left item must take a distinct right slot through one of its arcs.
struct AssignmentProblem {
  int num_left = 0;
  int num_right = 0;
  std::vector<Arc> arcs;
};

struct AssignmentResult {
  std::vector<int> match;  ///< right slot per left item
  std::int64_t total_cost = 0;
};

/// Real cost scaled by 2^10 and rounded half-to-even.
std::int64_t integer_cost(double cost);

/**
 * @brief Minimum-cost perfect matching of the left side (successive shortest paths).
 *
 * Among optimal matchings, returns the lexicographically smallest vector of right indices.
 * Throws InfeasibleError naming a left item that cannot be matched.
 */
AssignmentResult solve_assignment(const AssignmentProblem& problem);

/// Exact optimum by exhaustive enumeration; num_left <= 9 and num_right <= 64.
std::int64_t assignment_oracle(const AssignmentProblem& problem);

}  // namespace mplace
