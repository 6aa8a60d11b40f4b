#include "mplace/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mplace {

double runtime_score(double t_mp) {
  if (!(t_mp >= 0)) throw ValidationError("runtime must be nonnegative");
  return 1.0 + std::max(0.0, t_mp - 10.0);
}

double init_routing_score(std::span<const double> l_short, std::span<const double> l_global) {
  if (l_short.size() != 4 || l_global.size() != 4)
    throw ValidationError("congestion levels need 4 short and 4 global values");
  double s = 1.0;
  for (auto levels : {l_short, l_global}) {
    for (double l : levels) {
      const double e = std::max(0.0, l - 3.0);
      s += e * e;
    }
  }
  return s;
}

DesignScore design_score(const MetricsRecord& record) {
  if (record.dri < 1) throw ValidationError(record.design + ": dri must be at least 1");
  if (!(record.t_pr >= 0)) throw ValidationError(record.design + ": t_pr must be nonnegative");
  DesignScore d;
  d.t_mp_score = runtime_score(record.t_mp);
  d.sr_i = init_routing_score(record.l_short, record.l_global);
  d.sr_f = record.dri;
  d.routability = d.sr_i + d.sr_f;
  d.score = d.t_mp_score * record.t_pr * d.routability;
  return d;
}

double weighted_final(std::span<const ScoredDesign> scores, double hidden_weight) {
  if (scores.empty()) throw ValidationError("no scores to aggregate");
  if (!(hidden_weight > 0)) throw ValidationError("hidden weight must be positive");
  double num = 0.0, den = 0.0;
  for (const auto& s : scores) {
    const double w = s.hidden ? hidden_weight : 1.0;
    num += w * s.score.score * s.score.score;
    den += w;
  }
  return num / den;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("no values to summarize");
  Summary out;
  double logs = 0.0;
  for (double v : values) {
    if (!(v > 0)) throw ValidationError("geometric mean needs positive values");
    out.average += v;
    logs += std::log(v);
  }
  const double n = static_cast<double>(values.size());
  out.average /= n;
  out.geomean = std::exp(logs / n);
  double var = 0.0;
  for (double v : values) var += (v - out.average) * (v - out.average);
  out.stddev = std::sqrt(var / n);
  return out;
}

std::string score_table(const std::vector<MetricsRecord>& records, double hidden_weight) {
  std::ostringstream os;
  os << "design,t_mp_score,t_pr,sr_i,sr_f,rho,score,hidden\n";
  std::vector<ScoredDesign> scored;
  std::vector<double> col[5];
  for (const auto& r : records) {
    const DesignScore d = design_score(r);
    scored.push_back({d, r.hidden});
    os << r.design << ',' << format_number(d.t_mp_score) << ',' << format_number(r.t_pr) << ','
       << format_number(d.sr_i) << ',' << d.sr_f << ',' << format_number(d.routability) << ','
       << format_number(d.score) << ',' << (r.hidden ? 1 : 0) << '\n';
    col[0].push_back(d.t_mp_score);
    col[1].push_back(r.t_pr);
    col[2].push_back(d.sr_i);
    col[3].push_back(d.sr_f);
    col[4].push_back(d.routability);
  }
  if (records.empty()) return os.str();

  std::vector<double> totals;
  for (const auto& s : scored) totals.push_back(s.score.score);
  // a zero P&R time makes the geomean undefined; leave those cells empty
  auto row = [&](const char* name, double Summary::*field) {
    os << name;
    for (const auto& c : col) {
      os << ',';
      if (std::all_of(c.begin(), c.end(), [](double v) { return v > 0; })) os << format_number(summarize(c).*field);
    }
    os << ',';
    if (std::all_of(totals.begin(), totals.end(), [](double v) { return v > 0; }))
      os << format_number(summarize(totals).*field);
    os << ",\n";
  };
  row("Average", &Summary::average);
  row("GeoMean", &Summary::geomean);
  row("Stddev", &Summary::stddev);
  os << "# weighted_final " << format_number(weighted_final(scored, hidden_weight)) << '\n';
  return os.str();
}

}  // namespace mplace
