#include "finsler/scene.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "finsler/error.hpp"
#include "finsler/expr/eval.hpp"

namespace finsler::scene {

const char* to_string(Format f) { return f == Format::kCsv ? "csv" : "json"; }

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::kCsv;
  if (text == "json") return Format::kJson;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown output format '" + text + "' (csv or json)");
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// A value together with where it starts in the file, for error reporting.
struct Value {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
  bool quoted = false;

  [[noreturn]] void fail(const std::string& msg, std::size_t shift = 0) const {
    throw SceneParseError(line, column + shift, msg);
  }
};

double to_double(const Value& v, std::string_view text, std::size_t shift) {
  const std::string t = trim(text);
  double out = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(out)) {
    v.fail("expected a number, found '" + t + "'", shift);
  }
  return out;
}

double number(const Value& v) { return to_double(v, v.text, 0); }

long long integer(const Value& v) {
  const std::string t = trim(v.text);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    v.fail("expected an integer, found '" + t + "'");
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> split(const std::string& s,
                                                       char sep) {
  std::vector<std::pair<std::string, std::size_t>> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.emplace_back(s.substr(start, i - start), start);
      start = i + 1;
    }
  }
  return parts;
}

Vec4 vec4(const Value& v) {
  const auto parts = split(v.text, ',');
  if (parts.size() != kDim) v.fail("expected four comma separated numbers");
  Vec4 out{};
  for (int i = 0; i < kDim; ++i) {
    out[i] = to_double(v, parts[i].first, parts[i].second);
  }
  return out;
}

Box box(const Value& v) {
  const auto parts = split(v.text, ',');
  if (parts.size() != kDim) v.fail("expected four min:max ranges");
  Box out{};
  for (int i = 0; i < kDim; ++i) {
    const auto& [text, at] = parts[i];
    const auto colon = text.find(':');
    if (colon == std::string::npos) v.fail("expected min:max", at);
    out[i].min = to_double(v, std::string_view(text).substr(0, colon), at);
    out[i].max = to_double(v, std::string_view(text).substr(colon + 1),
                           at + colon + 1);
    if (out[i].max < out[i].min) v.fail("range max is below min", at);
  }
  return out;
}

bool boolean(const Value& v) {
  if (v.text == "true") return true;
  if (v.text == "false") return false;
  v.fail("expected true or false");
}

expr::ScalarField expression(const Value& v) {
  if (!v.quoted) v.fail("expressions must be double-quoted");
  try {
    return expr::ScalarField::parse(v.text);
  } catch (const SyntaxError& e) {
    v.fail(e.what(), 1 + e.offset());
  } catch (const UnknownIdentifier& e) {
    v.fail(e.what(), 1 + e.offset());
  }
}

double positive(const Value& v) {
  const double d = number(v);
  if (!(d > 0.0)) v.fail("expected a positive number");
  return d;
}

void assign(Scene& s, const std::string& section, const std::string& key,
            const Value& v) {
  const auto unknown = [&] {
    throw SceneParseError(v.line, 1,
                          "unknown key '" + key + "' in [" + section + "]");
  };
  if (section.empty()) {
    if (key == "name") {
      s.name = v.text;
    } else {
      unknown();
    }
  } else if (section == "space") {
    if (key == "F") {
      s.space.F = expression(v);
    } else if (key == "L1") {
      s.space.L1 = expression(v);
    } else if (key == "q") {
      s.space.q = number(v);
    } else if (key == "c") {
      s.space.c = positive(v);
    } else if (key == "H") {
      s.space.H = positive(v);
    } else if (key == "coupling") {
      s.space.coupling = number(v);
      if (s.space.coupling == 0.0) v.fail("coupling must be nonzero");
    } else if (key == "signature") {
      try {
        s.space.signature = geometry::Signature::parse(v.text);
      } catch (const Error& e) {
        v.fail(e.what());
      }
    } else if (key == "anisotropy") {
      s.anisotropy = positive(v);
    } else {
      unknown();
    }
  } else if (section == "particle") {
    if (key == "x0") {
      s.particle.x0 = vec4(v);
    } else if (key == "y0") {
      s.particle.y0 = vec4(v);
    } else if (key == "unit_speed") {
      s.particle.unit_speed = boolean(v);
    } else if (key == "y_ref") {
      s.particle.y_ref = vec4(v);
    } else {
      unknown();
    }
  } else if (section == "integrate") {
    if (key == "method") {
      try {
        s.integrate.method = dynamics::parse_method(v.text);
      } catch (const Error& e) {
        v.fail(e.what());
      }
    } else if (key == "dt") {
      s.integrate.params.dt = positive(v);
    } else if (key == "rtol") {
      s.integrate.params.rtol = positive(v);
    } else if (key == "atol") {
      s.integrate.params.atol = positive(v);
    } else if (key == "max_rejections") {
      s.integrate.params.max_rejections = static_cast<int>(integer(v));
    } else if (key == "t_end") {
      s.integrate.t_end = number(v);
      if (s.integrate.t_end < 0.0) v.fail("t_end must be >= 0");
    } else {
      unknown();
    }
  } else if (section == "sampling") {
    if (key == "seed") {
      const long long seed = integer(v);
      if (seed < 0) v.fail("seed must be >= 0");
      s.sampling.seed = static_cast<std::uint64_t>(seed);
    } else if (key == "count") {
      const long long n = integer(v);
      if (n < 1) v.fail("count must be >= 1");
      s.sampling.count = static_cast<int>(n);
    } else if (key == "x_box") {
      s.sampling.x_box = box(v);
    } else if (key == "y_box") {
      s.sampling.y_box = box(v);
    } else {
      unknown();
    }
  } else if (section == "output") {
    if (key == "format") {
      try {
        s.output.format = parse_format(v.text);
      } catch (const Error& e) {
        v.fail(e.what());
      }
    } else if (key == "path") {
      s.output.path = v.text;
    } else {
      unknown();
    }
  }
}

}  // namespace

Scene parse_scene(std::string_view text, const std::string& name) {
  Scene s;
  s.name = name;
  std::string section;
  bool have_F = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    pos = end + 1;

    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size() || line[i] == '#' || line[i] == ';') continue;

    if (line[i] == '[') {
      const auto close = line.find(']', i);
      if (close == std::string::npos) {
        throw SceneParseError(line_no, i + 1, "missing ']'");
      }
      const std::string rest = trim(std::string_view(line).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') {
        throw SceneParseError(line_no, close + 2, "text after section header");
      }
      section = trim(std::string_view(line).substr(i + 1, close - i - 1));
      if (section != "space" && section != "particle" &&
          section != "integrate" && section != "sampling" &&
          section != "output") {
        throw SceneParseError(line_no, i + 2,
                              "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=', i);
    if (eq == std::string::npos) {
      throw SceneParseError(line_no, i + 1, "expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(i, eq - i));
    if (key.empty()) throw SceneParseError(line_no, i + 1, "missing key");

    std::size_t v = eq + 1;
    while (v < line.size() && std::isspace(static_cast<unsigned char>(line[v]))) ++v;
    Value value;
    value.line = line_no;
    value.column = v + 1;
    if (v < line.size() && line[v] == '"') {
      const auto close = line.find('"', v + 1);
      if (close == std::string::npos) {
        throw SceneParseError(line_no, v + 1, "unterminated string");
      }
      value.text = line.substr(v + 1, close - v - 1);
      value.quoted = true;
      const std::string rest = trim(std::string_view(line).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') {
        throw SceneParseError(line_no, close + 2, "text after quoted value");
      }
    } else {
      auto hash = line.find('#', v);
      if (hash == std::string::npos) hash = line.size();
      value.text = trim(std::string_view(line).substr(v, hash - v));
      if (value.text.empty()) {
        throw SceneParseError(line_no, v + 1, "missing value");
      }
    }
    assign(s, section, key, value);
    if (section == "space" && key == "F") have_F = true;
  }
  if (!have_F) throw SceneParseError(line_no, 1, "[space] needs an F entry");
  return s;
}

std::string write_scene(const Scene& s) {
  std::ostringstream out;
  const auto vec = [](const Vec4& v) {
    return fmt(v[0]) + ", " + fmt(v[1]) + ", " + fmt(v[2]) + ", " + fmt(v[3]);
  };
  const auto bx = [](const Box& b) {
    std::string t;
    for (int i = 0; i < kDim; ++i) {
      if (i > 0) t += ", ";
      t += fmt(b[i].min) + ":" + fmt(b[i].max);
    }
    return t;
  };
  if (!s.name.empty()) out << "name = " << s.name << "\n\n";
  out << "[space]\n";
  out << "F = \"" << s.space.F.to_string() << "\"\n";
  out << "L1 = \"" << s.space.L1.to_string() << "\"\n";
  out << "q = " << fmt(s.space.q) << "\n";
  out << "c = " << fmt(s.space.c) << "\n";
  out << "H = " << fmt(s.space.H) << "\n";
  out << "coupling = " << fmt(s.space.coupling) << "\n";
  out << "signature = \"" << s.space.signature.to_string() << "\"\n";
  out << "anisotropy = " << fmt(s.anisotropy) << "\n\n";
  out << "[particle]\n";
  out << "x0 = " << vec(s.particle.x0) << "\n";
  out << "y0 = " << vec(s.particle.y0) << "\n";
  out << "unit_speed = " << (s.particle.unit_speed ? "true" : "false") << "\n";
  if (s.particle.y_ref) out << "y_ref = " << vec(*s.particle.y_ref) << "\n";
  out << "\n[integrate]\n";
  out << "method = " << dynamics::to_string(s.integrate.method) << "\n";
  out << "dt = " << fmt(s.integrate.params.dt) << "\n";
  out << "rtol = " << fmt(s.integrate.params.rtol) << "\n";
  out << "atol = " << fmt(s.integrate.params.atol) << "\n";
  out << "max_rejections = " << s.integrate.params.max_rejections << "\n";
  out << "t_end = " << fmt(s.integrate.t_end) << "\n\n";
  out << "[sampling]\n";
  out << "seed = " << s.sampling.seed << "\n";
  out << "count = " << s.sampling.count << "\n";
  out << "x_box = " << bx(s.sampling.x_box) << "\n";
  out << "y_box = " << bx(s.sampling.y_box) << "\n\n";
  out << "[output]\n";
  out << "format = " << to_string(s.output.format) << "\n";
  if (!s.output.path.empty()) out << "path = " << s.output.path << "\n";
  return out.str();
}

PointSampler::PointSampler(const SpaceDef& space, const Sampling& sampling)
    : PointSampler(space, sampling, sampling.seed) {}

PointSampler::PointSampler(const SpaceDef& space, const Sampling& sampling,
                           std::uint64_t seed)
    : space_(space), sampling_(sampling), rng_(seed) {}

PointSampler::Draw PointSampler::next_candidate() {
  // Uniform in [0, 1) from the top 53 bits; independent of the standard
  // library's distribution implementations.
  const auto uniform = [this](const Range& r) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return r.min + (r.max - r.min) * u;
  };
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Draw d;
    for (int i = 0; i < kDim; ++i) d.x[i] = uniform(sampling_.x_box[i]);
    for (int i = 0; i < kDim; ++i) d.y[i] = uniform(sampling_.y_box[i]);
    try {
      const double F = expr::evaluate(space_.F, geometry::make_point(d.x, d.y));
      if (F > 0.0 && F * F >= geometry::kAdmissibleRatio * dot(d.y, d.y)) {
        return d;
      }
    } catch (const Error&) {
    }
  }
  throw Error(ErrorKind::kInvalidArgument,
              "no point with F > 0 found in the sampling box");
}

PointSampler::Draw PointSampler::next() {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Draw d = next_candidate();
    if (geometry::admissible(space_, d.x, d.y)) return d;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "no admissible point found in the sampling box");
}

namespace {

void check_field(const expr::ScalarField& f, const std::string& name,
                 const expr::Point& p) {
  for (const double scale : {1.7, 0.5}) {
    double base = 0.0, scaled = 0.0;
    try {
      base = expr::evaluate(f, p);
      expr::Point q = p;
      for (int a = 0; a < kDim; ++a) q[expr::yvar(a)] *= scale;
      scaled = expr::evaluate(f, q);
    } catch (const DomainError&) {
      return;
    }
    const double residual = std::fabs(scaled - scale * base);
    if (residual > kHomogeneityTol * std::max(1.0, std::fabs(scale * base))) {
      double measured = std::nan("");
      if (base != 0.0 && scaled / base > 0.0) {
        measured = std::log(scaled / base) / std::log(scale);
      }
      throw HomogeneityViolation(name, 1.0, measured, residual);
    }
  }
}

}  // namespace

void verify_scene(const Scene& s, int samples) {
  PointSampler sampler(s.space, s.sampling);
  int checked = 0;
  for (int n = 0; n < samples; ++n) {
    const auto d = sampler.next_candidate();
    const expr::Point p = geometry::make_point(d.x, d.y);
    check_field(s.space.F, "F", p);
    if (!s.space.L1.is_zero()) check_field(s.space.L1, "L1", p);
    try {
      (void)geometry::build_geometry(s.space, d.x, d.y, 2);
      ++checked;
    } catch (const DomainError&) {
    } catch (const DegenerateMetric&) {
    }
  }
  if (checked == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "no sample in the sampling box has a usable metric");
  }
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kInvalidArgument, "cannot open scene file " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  if (const auto dot = name.find('.'); dot != std::string::npos) {
    name = name.substr(0, dot);
  }
  Scene s = parse_scene(buf.str(), name);
  verify_scene(s);
  return s;
}

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int c : count) n *= static_cast<std::size_t>(c);
  return n;
}

std::pair<Vec4, Vec4> Grid::point(std::size_t index) const {
  std::array<double, 2 * kDim> v{};
  for (int axis = 2 * kDim - 1; axis >= 0; --axis) {
    const auto c = static_cast<std::size_t>(count[axis]);
    const auto k = index % c;
    index /= c;
    v[axis] = c == 1 ? range[axis].min
                     : range[axis].min + (range[axis].max - range[axis].min) *
                                             static_cast<double>(k) /
                                             static_cast<double>(c - 1);
  }
  return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}};
}

bool Grid::interior(std::size_t index) const {
  for (int axis = 2 * kDim - 1; axis >= 0; --axis) {
    const auto c = static_cast<std::size_t>(count[axis]);
    const auto k = index % c;
    index /= c;
    if (c > 1 && (k == 0 || k == c - 1)) return false;
  }
  return true;
}

namespace {

int axis_of(const std::string& name) {
  static const char* names[] = {"x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3"};
  for (int i = 0; i < 2 * kDim; ++i) {
    if (name == names[i]) return i;
  }
  return -1;
}

void parse_axis(Grid& g, int axis, const std::string& text) {
  const auto bad = [&] {
    throw Error(ErrorKind::kInvalidArgument,
                "bad grid entry '" + text + "' (min:max:count or value)");
  };
  const auto parts = split(text, ':');
  const auto num = [&](const std::string& t) {
    const std::string s = trim(t);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad();
    return out;
  };
  if (parts.size() == 1) {
    g.range[axis] = {num(parts[0].first), num(parts[0].first)};
    g.count[axis] = 1;
  } else if (parts.size() == 3) {
    g.range[axis] = {num(parts[0].first), num(parts[1].first)};
    if (g.range[axis].max < g.range[axis].min) bad();
    const std::string c = trim(parts[2].first);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), n);
    if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || n < 1) {
      bad();
    }
    g.count[axis] = n;
  } else {
    bad();
  }
}

}  // namespace

Grid parse_grid(const std::string& spec, const Vec4& x_default,
                const Vec4& y_default) {
  Grid g;
  for (int i = 0; i < kDim; ++i) {
    g.range[i] = {x_default[i], x_default[i]};
    g.range[kDim + i] = {y_default[i], y_default[i]};
  }
  g.count.fill(1);
  const auto entries = split(spec, ',');
  const bool named = spec.find('=') != std::string::npos;
  if (!named) {
    if (entries.size() != 2 * kDim) {
      throw Error(ErrorKind::kInvalidArgument,
                  "grid needs eight entries x0..x3,y0..y3 or named entries");
    }
    for (int axis = 0; axis < 2 * kDim; ++axis) {
      parse_axis(g, axis, entries[axis].first);
    }
    return g;
  }
  for (const auto& [entry, at] : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "grid entry '" + entry + "' has no name");
    }
    const int axis = axis_of(trim(entry.substr(0, eq)));
    if (axis < 0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "unknown grid variable in '" + entry + "'");
    }
    parse_axis(g, axis, entry.substr(eq + 1));
  }
  return g;
}

}  // namespace finsler::scene
