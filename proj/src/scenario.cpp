#include "asv/scenario.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "asv/errors.hpp"
#include "asv/io.hpp"

namespace asv {

void GenParams::validate() const {
  if (n_obstacles < 0) throw ConfigError("gen_params: n_obstacles must be >= 0");
  if (n_waypoints_min < 0 || n_waypoints_max < n_waypoints_min)
    throw ConfigError("gen_params: invalid waypoint count range");
  if (!(path_length > 0.0)) throw ConfigError("gen_params: path_length must be > 0");
  if (!(mean_radius > 0.0)) throw ConfigError("gen_params: mean_radius must be > 0");
  if (!(offset_std > 0.0)) throw ConfigError("gen_params: offset_std must be > 0");
  if (!(vessel_width > 0.0)) throw ConfigError("gen_params: vessel_width must be > 0");
}

bool Scenario::operator==(const Scenario& o) const {
  return waypoints == o.waypoints && obstacles == o.obstacles &&
         start == o.start && end == o.end && seed == o.seed &&
         gen_params == o.gen_params;
}

GeneratedScenario generate_scenario_traced(const GenParams& params,
                                           std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  constexpr double pi = std::numbers::pi;

  const double theta_start = rng.uniform(0.0, 2.0 * pi);
  const Vec2 start = 0.5 * params.path_length *
                     Vec2(std::cos(theta_start), std::sin(theta_start));
  const Vec2 end = -start;

  const auto n_waypoints = static_cast<int>(
      rng.uniform_int(params.n_waypoints_min, params.n_waypoints_max));
  std::vector<Vec2> waypoints{start};
  const double jitter = params.path_length / 10.0;
  for (int k = 1; k <= n_waypoints; ++k) {
    const double frac = static_cast<double>(k) / (n_waypoints + 1);
    const double jx = rng.gaussian(0.0, jitter);
    const double jy = rng.gaussian(0.0, jitter);
    waypoints.push_back(start + frac * (end - start) + Vec2(jx, jy));
  }
  waypoints.push_back(end);

  GeneratedScenario out{Scenario{}, Path::build(waypoints), {}};
  Scenario& sc = out.scenario;
  sc.waypoints = std::move(waypoints);
  sc.start = start;
  sc.end = end;
  sc.seed = seed;
  sc.gen_params = params;

  const Path& path = out.path;
  while (static_cast<int>(sc.obstacles.size()) < params.n_obstacles) {
    const double arc = rng.uniform(0.1 * params.path_length, 0.9 * params.path_length);
    const double offset = rng.gaussian(0.0, params.offset_std);
    const double gamma = path.tangent_angle(arc);
    const Vec2 center = path.point(arc) +
                        offset * Vec2(std::cos(gamma - pi / 2), std::sin(gamma - pi / 2));
    std::int64_t radius = 0;
    while (radius == 0) radius = rng.poisson(params.mean_radius);
    const double clearance = static_cast<double>(radius) + 2.0 * params.vessel_width;
    if ((center - start).norm() < clearance || (center - end).norm() < clearance)
      continue;
    sc.obstacles.push_back({center, static_cast<double>(radius)});
    out.placements.push_back({arc, offset, gamma});
  }
  return out;
}

Scenario generate_scenario(const GenParams& params, std::uint64_t seed) {
  return generate_scenario_traced(params, seed).scenario;
}

std::string serialize_scenario(const Scenario& s) {
  const GenParams& g = s.gen_params;
  std::ostringstream os;
  os << "asv-scenario " << kScenarioFormatVersion << '\n';
  os << "seed " << s.seed << '\n';
  os << "gen_params"
     << " n_obstacles=" << g.n_obstacles
     << " n_waypoints_min=" << g.n_waypoints_min
     << " n_waypoints_max=" << g.n_waypoints_max
     << " path_length_m=" << format_double(g.path_length)
     << " mean_radius_m=" << format_double(g.mean_radius)
     << " offset_std_m=" << format_double(g.offset_std)
     << " vessel_width_m=" << format_double(g.vessel_width) << '\n';
  os << "start_m " << format_double(s.start.x()) << ' ' << format_double(s.start.y()) << '\n';
  os << "end_m " << format_double(s.end.x()) << ' ' << format_double(s.end.y()) << '\n';
  os << "waypoints " << s.waypoints.size() << '\n';
  for (const Vec2& w : s.waypoints)
    os << format_double(w.x()) << ' ' << format_double(w.y()) << '\n';
  os << "obstacles " << s.obstacles.size() << '\n';
  for (const Obstacle& o : s.obstacles)
    os << format_double(o.center.x()) << ' ' << format_double(o.center.y()) << ' '
       << format_double(o.radius) << '\n';
  os << "end\n";
  return os.str();
}

namespace {

class LineReader {
 public:
  LineReader(const std::string& text, std::string source)
      : in_(text), source_(std::move(source)) {}

  std::vector<std::string> next(const std::string& expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      for (std::string tok; ls >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    fail("unexpected end of file while reading " + expecting);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(source_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  double number(const std::string& tok, const std::string& field) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail("field '" + field + "': expected a finite number, got '" + tok + "'");
    }
  }

  std::int64_t integer(const std::string& tok, const std::string& field) const {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail("field '" + field + "': expected an integer, got '" + tok + "'");
    }
  }

  std::vector<std::string> keyword(const std::string& key, std::size_t values) {
    auto t = next(key);
    if (t[0] != key) fail("expected '" + key + "', got '" + t[0] + "'");
    if (t.size() != values + 1)
      fail("'" + key + "' expects " + std::to_string(values) + " value(s)");
    return t;
  }

 private:
  std::istringstream in_;
  std::string source_;
  int line_no_ = 0;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  LineReader rd(text, source);
  Scenario s;

  auto header = rd.next("header");
  if (header[0] != "asv-scenario" || header.size() != 2)
    rd.fail("not a scenario file (expected 'asv-scenario <version>')");
  const auto version = rd.integer(header[1], "version");
  if (version != kScenarioFormatVersion)
    throw UnsupportedVersionError(source + ": unsupported scenario version " +
                                  header[1] + " (supported: " +
                                  std::to_string(kScenarioFormatVersion) + ")");

  auto seed = rd.keyword("seed", 1);
  try {
    std::size_t used = 0;
    s.seed = std::stoull(seed[1], &used);
    if (used != seed[1].size()) throw std::invalid_argument(seed[1]);
  } catch (const std::exception&) {
    rd.fail("field 'seed': expected an unsigned integer");
  }

  auto gp = rd.next("gen_params");
  if (gp[0] != "gen_params") rd.fail("expected 'gen_params'");
  bool seen[7] = {};
  for (std::size_t i = 1; i < gp.size(); ++i) {
    const auto eq = gp[i].find('=');
    if (eq == std::string::npos) rd.fail("gen_params entry '" + gp[i] + "' is not key=value");
    const std::string key = gp[i].substr(0, eq), val = gp[i].substr(eq + 1);
    GenParams& g = s.gen_params;
    if (key == "n_obstacles") { g.n_obstacles = static_cast<int>(rd.integer(val, key)); seen[0] = true; }
    else if (key == "n_waypoints_min") { g.n_waypoints_min = static_cast<int>(rd.integer(val, key)); seen[1] = true; }
    else if (key == "n_waypoints_max") { g.n_waypoints_max = static_cast<int>(rd.integer(val, key)); seen[2] = true; }
    else if (key == "path_length_m") { g.path_length = rd.number(val, key); seen[3] = true; }
    else if (key == "mean_radius_m") { g.mean_radius = rd.number(val, key); seen[4] = true; }
    else if (key == "offset_std_m") { g.offset_std = rd.number(val, key); seen[5] = true; }
    else if (key == "vessel_width_m") { g.vessel_width = rd.number(val, key); seen[6] = true; }
    else rd.fail("unknown gen_params key '" + key + "'");
  }
  for (bool b : seen)
    if (!b) rd.fail("gen_params is missing a required key");

  auto st = rd.keyword("start_m", 2);
  s.start = {rd.number(st[1], "start_m.x"), rd.number(st[2], "start_m.y")};
  auto en = rd.keyword("end_m", 2);
  s.end = {rd.number(en[1], "end_m.x"), rd.number(en[2], "end_m.y")};

  auto wp = rd.keyword("waypoints", 1);
  const auto n_wp = rd.integer(wp[1], "waypoints");
  if (n_wp < 2) rd.fail("field 'waypoints': need at least 2");
  for (std::int64_t i = 0; i < n_wp; ++i) {
    auto t = rd.next("waypoint " + std::to_string(i));
    if (t.size() != 2) rd.fail("waypoint " + std::to_string(i) + ": expected 'x y'");
    s.waypoints.emplace_back(rd.number(t[0], "waypoint.x"), rd.number(t[1], "waypoint.y"));
  }

  auto ob = rd.keyword("obstacles", 1);
  const auto n_ob = rd.integer(ob[1], "obstacles");
  if (n_ob < 0) rd.fail("field 'obstacles': negative count");
  for (std::int64_t i = 0; i < n_ob; ++i) {
    auto t = rd.next("obstacle " + std::to_string(i));
    if (t.size() != 3) rd.fail("obstacle " + std::to_string(i) + ": expected 'x y radius'");
    Obstacle o{{rd.number(t[0], "obstacle.x"), rd.number(t[1], "obstacle.y")},
               rd.number(t[2], "obstacle.radius")};
    if (!(o.radius > 0.0)) rd.fail("obstacle " + std::to_string(i) + ": radius must be > 0");
    s.obstacles.push_back(o);
  }

  auto tail = rd.next("end marker");
  if (tail.size() != 1 || tail[0] != "end") rd.fail("expected 'end'");

  try {
    (void)Path::build(s.waypoints);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source + ": invalid waypoints: " + e.what());
  }
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& file) {
  write_file_atomic(file, serialize_scenario(s));
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::string text;
  try {
    text = read_file(file);
  } catch (const std::runtime_error& e) {
    throw ParseError(e.what());
  }
  return parse_scenario(text, file.string());
}

}  // namespace asv
