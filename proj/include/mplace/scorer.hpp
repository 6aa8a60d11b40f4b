#pragma once

#include <span>
#include <string>
#include <vector>

#include "mplace/io.hpp"

namespace mplace {

inline constexpr double kHiddenWeight = 140.0 / 38.0;

struct DesignScore {
  double t_mp_score = 1.0;
  double routability = 0.0;
  double sr_i = 1.0;
  int sr_f = 1;
  double score = 0.0;
};

/// 1 + max(0, t - 10) for a runtime in minutes. Throws ValidationError on negative input.
double runtime_score(double t_mp);

/// 1 + sum of squared excess over level 3, across both congestion vectors. Each must have 4 entries.
double init_routing_score(std::span<const double> l_short, std::span<const double> l_global);

DesignScore design_score(const MetricsRecord& record);

struct ScoredDesign {
  DesignScore score;
  bool hidden = false;
};

/// Weighted mean of squared scores; hidden designs count `hidden_weight` times.
double weighted_final(std::span<const ScoredDesign> scores, double hidden_weight = kHiddenWeight);

struct Summary {
  double average = 0.0;
  double geomean = 0.0;
  double stddev = 0.0;  ///< population
};

/// Throws ValidationError for an empty list or a nonpositive value (geomean undefined).
Summary summarize(std::span<const double> values);

/// One row per design plus Average/GeoMean/Stddev rows and the weighted final score.
std::string score_table(const std::vector<MetricsRecord>& records, double hidden_weight = kHiddenWeight);

}  // namespace mplace
