#include <algorithm>
#include <sstream>

#include "mplace/io.hpp"

namespace mplace {

namespace {

const char* column_fill(const SiteType& st) {
  if (st.capacity_of(ResourceType::DSP) > 0) return "#f4d6a0";
  if (st.capacity_of(ResourceType::BRAM) > 0) return "#a8d5f0";
  if (st.capacity_of(ResourceType::IO) > 0) return "#d9d9d9";
  return "#f7f7f7";
}

}  // namespace

std::string write_svg(const FpgaLayout& layout, const Design& design, const Placement& placement) {
  // one grid unit = 4 px; y grows upward on the fabric, downward in SVG
  constexpr double s = 4.0;
  const double W = layout.grid_w() * s;
  const double H = layout.grid_h() * s;
  auto X = [&](double x) { return format_number(x * s); };
  auto Y = [&](double y, double h) { return format_number(H - (y + h) * s); };
  auto L = [&](double v) { return format_number(v * s); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(W) << "\" height=\"" << format_number(H)
     << "\" viewBox=\"0 0 " << format_number(W) << ' ' << format_number(H) << "\">\n";
  os << "<g id=\"columns\">\n";
  for (int x = 0; x < layout.grid_w(); ++x) {
    const SiteType* st = layout.column_site(x);
    if (!st || layout.column_types()[x] < 0) continue;
    os << "<rect class=\"column\" x=\"" << X(x) << "\" y=\"0\" width=\"" << L(st->width) << "\" height=\""
       << format_number(H) << "\" fill=\"" << column_fill(*st) << "\"><title>" << st->name << "</title></rect>\n";
  }
  os << "</g>\n<g id=\"macros\">\n";
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& inst = design.instances[i];
    if (!is_macro(inst.resource)) continue;
    const auto& p = placement.positions[i];
    os << "<rect class=\"macro\" x=\"" << X(p.x) << "\" y=\"" << Y(p.y, inst.height) << "\" width=\""
       << L(inst.width) << "\" height=\"" << L(inst.height) << "\" fill=\""
       << (inst.resource == ResourceType::DSP ? "#d9822b" : "#2b7bb9") << "\" stroke=\"#333\" stroke-width=\"0.5\">"
       << "<title>" << inst.name << "</title></rect>\n";
  }
  os << "</g>\n<g id=\"cascades\">\n";
  for (const auto& shape : design.shapes) {
    double xl = 1e300, yl = 1e300, xh = -1e300, yh = -1e300;
    for (int m : shape.members) {
      const auto& p = placement.positions[m];
      const auto& inst = design.instances[m];
      xl = std::min(xl, p.x);
      yl = std::min(yl, p.y);
      xh = std::max(xh, p.x + inst.width);
      yh = std::max(yh, p.y + inst.height);
    }
    os << "<rect class=\"cascade\" x=\"" << X(xl) << "\" y=\"" << Y(yl, yh - yl) << "\" width=\"" << L(xh - xl)
       << "\" height=\"" << L(yh - yl) << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"><title>"
       << shape.id << "</title></rect>\n";
  }
  os << "</g>\n<g id=\"regions\">\n";
  for (const auto& region : design.regions) {
    for (const auto& r : region.rects) {
      os << "<rect class=\"region\" x=\"" << X(r.xl) << "\" y=\"" << Y(r.yl, r.height()) << "\" width=\""
         << L(r.width()) << "\" height=\"" << L(r.height())
         << "\" fill=\"none\" stroke=\"#27ae60\" stroke-width=\"1.5\" stroke-dasharray=\"6,3\"><title>" << region.id
         << "</title></rect>\n";
    }
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace mplace
