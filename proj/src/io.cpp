#include "mplace/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mplace {

namespace {

struct Line {
  int number;
  std::vector<std::string_view> tokens;
};

// Splits into whitespace-separated tokens with '#' comments removed; blank lines are skipped.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) line.tokens.push_back(raw.substr(i, j - i));
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double to_real(std::string_view s, int line, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

long long to_int(std::string_view s, int line, std::string_view what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

ResourceType to_resource(std::string_view s, int line) {
  auto r = parse_resource(s);
  if (!r) throw ParseError(line, "unknown resource '" + std::string(s) + "'");
  return *r;
}

void expect_min_tokens(const Line& l, std::size_t n, std::string_view usage) {
  if (l.tokens.size() < n) throw ParseError(l.number, "expected " + std::string(usage));
}

std::string str(std::string_view s) { return std::string(s); }

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Layout

FpgaLayout parse_layout(std::string_view text) {
  int grid_w = -1, grid_h = -1, grid_line = 0;
  std::vector<SiteType> types;
  std::vector<std::pair<int, std::pair<int, int>>> columns;  // line, (x, type)

  for (const auto& l : tokenize(text)) {
    const auto& t = l.tokens;
    if (t[0] == "GRID") {
      if (t.size() != 3) throw ParseError(l.number, "expected GRID W H");
      if (grid_w >= 0) throw ParseError(l.number, "duplicate GRID");
      grid_w = static_cast<int>(to_int(t[1], l.number, "grid width"));
      grid_h = static_cast<int>(to_int(t[2], l.number, "grid height"));
      if (grid_w <= 0 || grid_h <= 0) throw ParseError(l.number, "grid dimensions must be positive");
      grid_line = l.number;
    } else if (t[0] == "SITETYPE") {
      if (t.size() != 5) throw ParseError(l.number, "expected SITETYPE name width height RES:cap[,RES:cap...]");
      SiteType st;
      st.name = str(t[1]);
      for (const auto& other : types) {
        if (other.name == st.name) throw ParseError(l.number, "duplicate site type '" + st.name + "'");
      }
      st.width = static_cast<int>(to_int(t[2], l.number, "site width"));
      st.height = static_cast<int>(to_int(t[3], l.number, "site height"));
      if (st.width < 1 || st.height < 1) throw ParseError(l.number, "site size must be positive");
      std::string_view caps = t[4];
      while (!caps.empty()) {
        auto comma = caps.find(',');
        std::string_view item = caps.substr(0, comma);
        auto colon = item.find(':');
        if (colon == std::string_view::npos) throw ParseError(l.number, "expected RES:cap, got '" + str(item) + "'");
        auto r = to_resource(item.substr(0, colon), l.number);
        auto cap = to_int(item.substr(colon + 1), l.number, "capacity");
        if (cap < 0) throw ParseError(l.number, "negative capacity");
        st.capacity[index_of(r)] = static_cast<int>(cap);
        caps = comma == std::string_view::npos ? std::string_view{} : caps.substr(comma + 1);
      }
      if (std::all_of(st.capacity.begin(), st.capacity.end(), [](int c) { return c == 0; }))
        throw ParseError(l.number, "site type '" + st.name + "' hosts no resource");
      types.push_back(std::move(st));
    } else if (t[0] == "COLUMN") {
      if (t.size() != 3) throw ParseError(l.number, "expected COLUMN x sitetype");
      int x = static_cast<int>(to_int(t[1], l.number, "column"));
      int type = -1;
      for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i].name == t[2]) type = static_cast<int>(i);
      }
      if (type < 0) throw ParseError(l.number, "unknown site type '" + str(t[2]) + "'");
      for (const auto& c : columns) {
        if (c.second.first == x) throw ParseError(l.number, "duplicate column " + std::to_string(x));
      }
      columns.push_back({l.number, {x, type}});
    } else {
      throw ParseError(l.number, "unknown keyword '" + str(t[0]) + "'");
    }
  }
  if (grid_w < 0) throw ParseError(0, "missing GRID line");

  std::vector<int> column_types(grid_w, -1);
  for (const auto& [line, c] : columns) {
    const auto& [x, type] = c;
    if (x < 0 || x >= grid_w) throw ParseError(line, "column " + std::to_string(x) + " outside the grid");
    if (grid_h % types[type].height != 0) throw ParseError(line, "height does not tile column " + std::to_string(x));
    column_types[x] = type;
  }
  try {
    return FpgaLayout(grid_w, grid_h, std::move(types), std::move(column_types));
  } catch (const ValidationError& e) {
    throw ParseError(grid_line, e.what());
  }
}

std::string write_layout(const FpgaLayout& layout) {
  std::ostringstream os;
  os << "GRID " << layout.grid_w() << ' ' << layout.grid_h() << '\n';
  for (const auto& st : layout.site_types()) {
    os << "SITETYPE " << st.name << ' ' << st.width << ' ' << st.height << ' ';
    bool first = true;
    for (auto r : kAllResources) {
      if (st.capacity_of(r) == 0) continue;
      os << (first ? "" : ",") << to_string(r) << ':' << st.capacity_of(r);
      first = false;
    }
    os << '\n';
  }
  const auto& cols = layout.column_types();
  for (int x = 0; x < layout.grid_w(); ++x) {
    if (cols[x] >= 0) os << "COLUMN " << x << ' ' << layout.site_types()[cols[x]].name << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Design

Design parse_design(std::string_view text, const FpgaLayout& layout) {
  Design design;
  struct PendingRegion {
    int line;
    int inst;
    std::string id;
  };
  std::vector<PendingRegion> pending_regions;
  std::map<std::string, int, std::less<>> inst_line;
  std::vector<std::pair<int, const Line*>> deferred;  // SHAPE, NET, FIXED need every INST

  auto lines = tokenize(text);
  for (const auto& l : lines) {
    const auto& t = l.tokens;
    if (t[0] == "INST") {
      if (t.size() != 3 && !(t.size() == 5 && t[3] == "REGION"))
        throw ParseError(l.number, "expected INST name RES [REGION id]");
      Instance inst;
      inst.name = str(t[1]);
      if (inst.name.find(':') != std::string::npos)
        throw ParseError(l.number, "instance name '" + inst.name + "' contains ':'");
      if (!inst_line.emplace(inst.name, l.number).second)
        throw ParseError(l.number, "duplicate instance '" + inst.name + "'");
      inst.resource = to_resource(t[2], l.number);
      if (layout.host_type(inst.resource) < 0)
        throw ParseError(l.number, "layout has no site for " + str(t[2]));
      size_instance(inst, layout);
      if (t.size() == 5) pending_regions.push_back({l.number, static_cast<int>(design.instances.size()), str(t[4])});
      design.instances.push_back(std::move(inst));
    } else if (t[0] == "REGION") {
      if (t.size() < 6 || (t.size() - 2) % 4 != 0) throw ParseError(l.number, "expected REGION id xl yl xh yh [...]");
      Region region;
      region.id = str(t[1]);
      if (design.find_region(region.id) >= 0) throw ParseError(l.number, "duplicate region '" + region.id + "'");
      for (std::size_t i = 2; i < t.size(); i += 4) {
        Rect r{to_real(t[i], l.number, "xl"), to_real(t[i + 1], l.number, "yl"), to_real(t[i + 2], l.number, "xh"),
               to_real(t[i + 3], l.number, "yh")};
        if (!(r.xl < r.xh && r.yl < r.yh)) throw ParseError(l.number, "degenerate region rectangle");
        if (r.xl < 0 || r.yl < 0 || r.xh > layout.grid_w() || r.yh > layout.grid_h())
          throw ParseError(l.number, "region rectangle leaves the chip");
        region.rects.push_back(r);
      }
      design.regions.push_back(std::move(region));
    } else if (t[0] == "SHAPE" || t[0] == "NET" || t[0] == "FIXED") {
      deferred.push_back({l.number, &l});
    } else {
      throw ParseError(l.number, "unknown keyword '" + str(t[0]) + "'");
    }
  }
  design.reindex();

  for (const auto& p : pending_regions) {
    int r = design.find_region(p.id);
    if (r < 0) throw ParseError(p.line, "unknown region '" + p.id + "'");
    design.instances[p.inst].region = r;
  }

  auto lookup = [&](std::string_view name, int line) {
    int i = design.find_instance(name);
    if (i < 0) throw ParseError(line, "unknown instance '" + str(name) + "'");
    return i;
  };

  std::vector<bool> fixed_seen(design.instances.size(), false);
  for (const auto& [number, lp] : deferred) {
    const auto& t = lp->tokens;
    if (t[0] == "SHAPE") {
      expect_min_tokens(*lp, 5, "SHAPE id RES m1 m2 ...");
      CascadeShape shape;
      shape.id = str(t[1]);
      for (const auto& s : design.shapes) {
        if (s.id == shape.id) throw ParseError(number, "duplicate shape '" + shape.id + "'");
      }
      shape.resource = to_resource(t[2], number);
      if (!is_macro(shape.resource)) throw ParseError(number, "shape '" + shape.id + "' must be DSP or BRAM");
      int region = -2;
      for (std::size_t i = 3; i < t.size(); ++i) {
        int m = lookup(t[i], number);
        auto& inst = design.instances[m];
        if (inst.resource != shape.resource)
          throw ParseError(number, "shape '" + shape.id + "' mixes resource types");
        if (inst.shape >= 0) throw ParseError(number, "instance '" + inst.name + "' already belongs to a shape");
        if (region != -2 && inst.region != region)
          throw ParseError(number, "shape '" + shape.id + "' members disagree on region");
        region = inst.region;
        inst.shape = static_cast<int>(design.shapes.size());
        shape.members.push_back(m);
      }
      design.shapes.push_back(std::move(shape));
    } else if (t[0] == "NET") {
      expect_min_tokens(*lp, 3, "NET name inst:dx:dy ...");
      Net net{str(t[1]), {}};
      for (std::size_t i = 2; i < t.size(); ++i) {
        std::string_view tok = t[i];
        auto c2 = tok.rfind(':');
        auto c1 = c2 == std::string_view::npos || c2 == 0 ? std::string_view::npos : tok.rfind(':', c2 - 1);
        if (c1 == std::string_view::npos) throw ParseError(number, "expected inst:dx:dy, got '" + str(tok) + "'");
        Pin pin;
        pin.inst = lookup(tok.substr(0, c1), number);
        pin.dx = to_real(tok.substr(c1 + 1, c2 - c1 - 1), number, "pin dx");
        pin.dy = to_real(tok.substr(c2 + 1), number, "pin dy");
        net.pins.push_back(pin);
      }
      design.nets.push_back(std::move(net));
    } else {
      if (t.size() != 4) throw ParseError(number, "expected FIXED name x y");
      int i = lookup(t[1], number);
      if (fixed_seen[i]) throw ParseError(number, "instance '" + str(t[1]) + "' fixed twice");
      fixed_seen[i] = true;
      auto& inst = design.instances[i];
      inst.fixed = true;
      inst.fixed_pos = Point{to_real(t[2], number, "x"), to_real(t[3], number, "y")};
    }
  }

  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& inst = design.instances[i];
    if (inst.resource == ResourceType::IO && !inst.fixed)
      throw ParseError(inst_line.find(inst.name)->second, "IO instance '" + inst.name + "' must be FIXED");
  }
  try {
    design.validate(layout);
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(0, e.what());
  }
  return design;
}

std::string write_design(const Design& design) {
  std::ostringstream os;
  for (const auto& region : design.regions) {
    os << "REGION " << region.id;
    for (const auto& r : region.rects)
      os << ' ' << format_number(r.xl) << ' ' << format_number(r.yl) << ' ' << format_number(r.xh) << ' '
         << format_number(r.yh);
    os << '\n';
  }
  for (const auto& inst : design.instances) {
    os << "INST " << inst.name << ' ' << to_string(inst.resource);
    if (inst.region >= 0) os << " REGION " << design.regions[inst.region].id;
    os << '\n';
  }
  for (const auto& inst : design.instances) {
    if (inst.fixed)
      os << "FIXED " << inst.name << ' ' << format_number(inst.fixed_pos.x) << ' ' << format_number(inst.fixed_pos.y)
         << '\n';
  }
  for (const auto& shape : design.shapes) {
    os << "SHAPE " << shape.id << ' ' << to_string(shape.resource);
    for (int m : shape.members) os << ' ' << design.instances[m].name;
    os << '\n';
  }
  for (const auto& net : design.nets) {
    os << "NET " << net.name;
    for (const auto& p : net.pins)
      os << ' ' << design.instances[p.inst].name << ':' << format_number(p.dx) << ':' << format_number(p.dy);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Placement

Placement parse_placement(std::string_view text, const Design& design) {
  const std::size_t n = design.instances.size();
  Placement pl;
  pl.positions.assign(n, Point{});
  pl.legal.assign(n, false);
  std::vector<bool> seen(n, false);
  for (const auto& l : tokenize(text)) {
    const auto& t = l.tokens;
    if (t.size() != 3 && !(t.size() == 4 && t[3] == "LEGAL")) throw ParseError(l.number, "expected name x y [LEGAL]");
    int i = design.find_instance(t[0]);
    if (i < 0) throw ParseError(l.number, "unknown instance '" + str(t[0]) + "'");
    if (seen[i]) throw ParseError(l.number, "instance '" + str(t[0]) + "' placed twice");
    seen[i] = true;
    Point p{to_real(t[1], l.number, "x"), to_real(t[2], l.number, "y")};
    bool legal = t.size() == 4;
    if (legal && (p.x != std::floor(p.x) || p.y != std::floor(p.y)))
      throw ParseError(l.number, "LEGAL position of '" + str(t[0]) + "' is not site-aligned");
    pl.positions[i] = p;
    pl.legal[i] = legal;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw ParseError(0, "placement lacks instance '" + design.instances[i].name + "'");
  }
  return pl;
}

std::string write_placement(const Design& design, const Placement& placement) {
  std::string out;
  out.reserve(design.instances.size() * 24);
  for (std::size_t i = 0; i < design.instances.size(); ++i) {
    const auto& p = placement.positions[i];
    out += design.instances[i].name;
    out += ' ';
    out += format_number(p.x);
    out += ' ';
    out += format_number(p.y);
    if (placement.legal[i]) out += " LEGAL";
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<MetricsRecord> parse_metrics(std::string_view text) {
  std::vector<MetricsRecord> records;
  for (const auto& l : tokenize(text)) {
    const auto& t = l.tokens;
    if (t[0] != "DESIGN") throw ParseError(l.number, "unknown keyword '" + str(t[0]) + "'");
    if (t.size() != 7 && !(t.size() == 8 && t[7] == "hidden"))
      throw ParseError(l.number, "expected DESIGN name t_mp= t_pr= l_short= l_global= dri= [hidden]");
    MetricsRecord rec;
    rec.design = str(t[1]);
    auto field = [&](std::size_t idx, std::string_view key) {
      std::string_view tok = t[idx];
      if (tok.substr(0, key.size()) != key || tok.size() <= key.size() || tok[key.size()] != '=')
        throw ParseError(l.number, "expected " + str(key) + "=..., got '" + str(tok) + "'");
      return tok.substr(key.size() + 1);
    };
    auto four = [&](std::string_view list, std::string_view what) {
      std::array<double, 4> v{};
      std::size_t count = 0;
      while (true) {
        auto comma = list.find(',');
        if (count == 4) throw ParseError(l.number, str(what) + " needs exactly 4 values");
        v[count++] = to_real(list.substr(0, comma), l.number, what);
        if (comma == std::string_view::npos) break;
        list = list.substr(comma + 1);
      }
      if (count != 4) throw ParseError(l.number, str(what) + " needs exactly 4 values");
      return v;
    };
    rec.t_mp = to_real(field(2, "t_mp"), l.number, "t_mp");
    rec.t_pr = to_real(field(3, "t_pr"), l.number, "t_pr");
    rec.l_short = four(field(4, "l_short"), "l_short");
    rec.l_global = four(field(5, "l_global"), "l_global");
    rec.dri = static_cast<int>(to_int(field(6, "dri"), l.number, "dri"));
    rec.hidden = t.size() == 8;
    if (rec.t_mp < 0 || rec.t_pr < 0) throw ParseError(l.number, "runtimes must be nonnegative");
    if (rec.dri < 1) throw ParseError(l.number, "dri must be a positive integer");
    records.push_back(std::move(rec));
  }
  return records;
}

std::string write_metrics(const std::vector<MetricsRecord>& records) {
  std::ostringstream os;
  auto list = [](const std::array<double, 4>& v) {
    return format_number(v[0]) + "," + format_number(v[1]) + "," + format_number(v[2]) + "," + format_number(v[3]);
  };
  for (const auto& r : records) {
    os << "DESIGN " << r.design << " t_mp=" << format_number(r.t_mp) << " t_pr=" << format_number(r.t_pr)
       << " l_short=" << list(r.l_short) << " l_global=" << list(r.l_global) << " dri=" << r.dri;
    if (r.hidden) os << " hidden";
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mplace
