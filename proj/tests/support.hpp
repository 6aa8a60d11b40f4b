#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mplace/generator.hpp"
#include "mplace/types.hpp"

namespace testing {

using namespace mplace;

inline Instance& add_inst(Design& d, const FpgaLayout& layout, const std::string& name, ResourceType r,
                          int region = -1) {
  Instance inst;
  inst.name = name;
  inst.resource = r;
  inst.region = region;
  size_instance(inst, layout);
  d.instances.push_back(inst);
  d.reindex();
  return d.instances.back();
}

inline void add_net(Design& d, const std::string& name, std::initializer_list<Pin> pins) {
  d.nets.push_back(Net{name, pins});
}

// Columnar fabric of the generator: IO at both edges, DSP at x = 6, 18, ..., BRAM at x = 11, 23, ...
inline FpgaLayout fabric(int w = 24, int h = 20) { return make_columnar_layout(w, h); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-12, std::abs(a), std::abs(b)}); }

}  // namespace testing
