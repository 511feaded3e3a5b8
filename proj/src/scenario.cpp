#include "cqt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "cqt/format.hpp"

namespace cqt {

using nlohmann::json;

namespace {

constexpr std::pair<Task, std::string_view> kTaskNames[] = {
    {Task::Trajectory, "trajectory"},   {Task::Path, "path"},
    {Task::Born, "born"},               {Task::FieldClosed, "field-closed"},
    {Task::FieldTrajectory, "field-trajectory"}, {Task::Compare, "compare"},
    {Task::Poirier, "poirier"},         {Task::Figures, "figures"},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string location(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

[[noreturn]] void parse_error(std::string_view text, std::size_t offset, const std::string& what) {
  throw Error(ErrorKind::ParseError, "config " + location(text, offset) + ": " + what);
}

/// Splits `key = value` items at top-level commas and newlines; '#' starts
/// a comment that runs to the end of the line.
json parse_key_values(std::string_view text) {
  json doc = json::object();
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    int depth = 0;
    bool quoted = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (quoted) {
        if (c == '\\') ++i;
        else if (c == '"') quoted = false;
        continue;
      }
      if (c == '"') quoted = true;
      else if (c == '[' || c == '{') ++depth;
      else if (c == ']' || c == '}') --depth;
      else if (depth == 0 && (c == ',' || c == '\n' || c == '#')) break;
    }
    if (quoted) parse_error(text, start, "unterminated string");
    if (depth != 0) parse_error(text, start, "unbalanced brackets");
    std::string_view item = text.substr(start, i - start);
    if (i < text.size() && text[i] == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    }
    ++i;

    const std::size_t lead = item.find_first_not_of(" \t\r");
    const std::size_t item_offset = start + (lead == std::string_view::npos ? 0 : lead);
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) parse_error(text, item_offset, "expected key = value");
    const std::string_view key = trim(item.substr(0, eq));
    const std::string_view raw = trim(item.substr(eq + 1));
    if (key.empty()) parse_error(text, item_offset, "empty key");
    if (raw.empty()) parse_error(text, item_offset, "missing value for '" + std::string(key) + "'");
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error& e) {
      parse_error(text, item_offset + eq + 1, "bad value for '" + std::string(key) + "': " + e.what());
    }

    json* node = &doc;
    std::string_view rest = key;
    while (true) {
      const auto dot = rest.find('.');
      const std::string part(trim(rest.substr(0, dot)));
      if (part.empty()) parse_error(text, item_offset, "malformed key '" + std::string(key) + "'");
      if (dot == std::string_view::npos) {
        (*node)[part] = std::move(value);
        break;
      }
      json& child = (*node)[part];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) parse_error(text, item_offset, "key '" + std::string(key) + "' nests under a value");
      node = &child;
      rest = rest.substr(dot + 1);
    }
  }
  return doc;
}

class Problems {
 public:
  void add(std::string msg) { list_.push_back(std::move(msg)); }
  bool empty() const { return list_.empty(); }
  void raise() const {
    if (list_.empty()) return;
    std::string joined;
    for (const auto& p : list_) joined += (joined.empty() ? "" : "; ") + p;
    throw Error(ErrorKind::ValidationError, joined);
  }

 private:
  std::vector<std::string> list_;
};

std::optional<double> number_field(const json& obj, const char* key, Problems& problems, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  problems.add(path + key + " must be a number");
  return std::nullopt;
}

Lattice grid_from_json(const json& v, Problems& problems) {
  if (v.is_string()) {
    try {
      return parse_grid(v.get<std::string>());
    } catch (const Error& e) {
      problems.add(e.what());
      return {};
    }
  }
  Lattice lat;
  auto axis = [&](const char* key, double& lo, double& hi, int& count) {
    if (!v.is_object() || !v.contains(key)) {
      problems.add(std::string("grid.") + key + " is required");
      return;
    }
    const json& a = v.at(key);
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number_integer()) {
      problems.add(std::string("grid.") + key + " must be [min, max, count]");
      return;
    }
    lo = a[0].get<double>();
    hi = a[1].get<double>();
    count = a[2].get<int>();
  };
  axis("x_r", lat.re_min, lat.re_max, lat.re_count);
  axis("x_i", lat.im_min, lat.im_max, lat.im_count);
  return lat;
}

ScenarioConfig from_json(const json& doc, Problems& problems) {
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "config 1:1: top level must be an object");
  ScenarioConfig cfg;

  static const std::vector<std::string> known = {"state", "task", "seeds", "seed", "t_span", "arc_length", "grid",
                                                 "integrator", "tol", "units", "hbar", "mass", "output", "out",
                                                 "masked"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) problems.add("unknown field '" + key + "'");
  }

  if (doc.contains("task")) {
    const json& t = doc.at("task");
    std::optional<Task> task = t.is_string() ? parse_task(t.get<std::string>()) : std::nullopt;
    if (task) cfg.task = *task;
    else problems.add("task must be one of trajectory, path, born, field-closed, field-trajectory, compare, poirier, figures");
  } else {
    problems.add("task is required");
  }

  if (doc.contains("state")) {
    if (doc.at("state").is_string()) cfg.state = doc.at("state").get<std::string>();
    else problems.add("state must be a string");
  }

  const json units = doc.contains("units") ? doc.at("units") : json::object();
  if (!units.is_object()) problems.add("units must be an object");
  for (const char* key : {"hbar", "mass"}) {
    std::optional<double> v = doc.contains(key) ? number_field(doc, key, problems, "")
                                                : (units.is_object() ? number_field(units, key, problems, "units.")
                                                                     : std::nullopt);
    if (v) (std::string_view(key) == "hbar" ? cfg.units.hbar : cfg.units.mass) = *v;
  }

  auto add_seed = [&](const json& s) {
    std::optional<Complex> z;
    if (s.is_string()) z = parse_complex(s.get<std::string>());
    else if (s.is_number()) z = Complex(s.get<double>(), 0);
    if (z) cfg.seeds.push_back(*z);
    else problems.add("seed " + s.dump() + " is not a complex literal a+bi");
  };
  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    if (s.is_array()) {
      for (const auto& item : s) add_seed(item);
    } else {
      add_seed(s);
    }
  }
  if (doc.contains("seed")) add_seed(doc.at("seed"));

  if (doc.contains("t_span")) {
    const json& s = doc.at("t_span");
    if (s.is_string()) {
      try {
        cfg.t_span = parse_t_span(s.get<std::string>());
      } catch (const Error& e) {
        problems.add(e.what());
      }
    } else if (s.is_array() && s.size() == 2 && s[0].is_number() && s[1].is_number()) {
      cfg.t_span = std::pair{s[0].get<double>(), s[1].get<double>()};
    } else {
      problems.add("t_span must be \"t0:t1\" or [t0, t1]");
    }
  }
  cfg.arc_length = number_field(doc, "arc_length", problems, "");
  if (doc.contains("grid")) cfg.grid = grid_from_json(doc.at("grid"), problems);

  if (doc.contains("integrator")) {
    const json& in = doc.at("integrator");
    if (!in.is_object()) {
      problems.add("integrator must be an object");
    } else {
      for (const auto& [key, _] : in.items()) {
        if (key != "method" && key != "rel_tol" && key != "abs_tol" && key != "max_step" && key != "node_guard" &&
            key != "max_steps") {
          problems.add("unknown field 'integrator." + key + "'");
        }
      }
      if (in.contains("method")) {
        const json& m = in.at("method");
        if (m == "rk45") cfg.integrator.method = IntegratorMethod::AdaptiveRK45;
        else if (m == "rk4") cfg.integrator.method = IntegratorMethod::FixedRK4;
        else problems.add("integrator.method must be \"rk45\" or \"rk4\"");
      }
      if (auto v = number_field(in, "rel_tol", problems, "integrator.")) cfg.integrator.rel_tol = *v;
      if (auto v = number_field(in, "abs_tol", problems, "integrator.")) cfg.integrator.abs_tol = *v;
      if (auto v = number_field(in, "max_step", problems, "integrator.")) cfg.integrator.max_step = *v;
      if (auto v = number_field(in, "node_guard", problems, "integrator.")) cfg.integrator.node_guard = *v;
      if (in.contains("max_steps")) {
        if (in.at("max_steps").is_number_unsigned()) cfg.integrator.max_steps = in.at("max_steps").get<std::size_t>();
        else problems.add("integrator.max_steps must be a positive integer");
      }
    }
  }
  if (auto v = number_field(doc, "tol", problems, "")) {
    cfg.integrator.rel_tol = *v;
    cfg.integrator.abs_tol = *v;
  }

  for (const char* key : {"output", "out"}) {
    if (!doc.contains(key)) continue;
    if (doc.at(key).is_string()) cfg.output = doc.at(key).get<std::string>();
    else problems.add(std::string(key) + " must be a string");
  }
  if (doc.contains("masked")) {
    if (doc.at("masked").is_boolean()) cfg.masked = doc.at("masked").get<bool>();
    else problems.add("masked must be true or false");
  }
  return cfg;
}

std::string method_name(IntegratorMethod m) { return m == IntegratorMethod::FixedRK4 ? "rk4" : "rk45"; }

json integrator_json(const IntegratorSettings& s) {
  json j;
  j["method"] = method_name(s.method);
  j["rel_tol"] = s.rel_tol;
  j["abs_tol"] = s.abs_tol;
  j["max_step"] = s.max_step;
  j["node_guard"] = s.node_guard;
  j["max_steps"] = s.max_steps;
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_number(double v) { return format_number(v); }

std::unique_ptr<std::ostream> open_output(const std::string& path) {
  if (path.empty() || path == "-") return nullptr;
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto file = std::make_unique<std::ofstream>(p, std::ios::binary);
  if (!*file) throw Error(ErrorKind::ValidationError, "cannot open output file '" + path + "'");
  return file;
}

/// `out.csv` -> `out_2.csv` for the k-th of several seeds.
std::string indexed_path(const std::string& path, std::size_t index, std::size_t count) {
  if (count <= 1 || path.empty() || path == "-") return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(index) + p.extension().string())).string();
}

/// Analytic HO n=1 orbit y² - 1 = (y0² - 1) e^{2iωt}, y = αx, with the
/// square-root branch carried continuously from y0.
std::optional<double> ho1_analytic_deviation(const StateSpec& spec, const RhoTrace& trace) {
  const auto* ho = spec.get_if<HarmonicOscillator>();
  if (ho == nullptr || ho->n != 1 || trace.samples.empty()) return std::nullopt;
  const double y0 = ho->alpha * trace.x_r0;
  const Complex c = y0 * y0 - 1.0;
  Complex prev = y0;
  double worst = 0;
  for (const auto& s : trace.samples) {
    Complex y = std::sqrt(1.0 + c * std::exp(Complex(0, 2 * ho->omega * s.t)));
    if (std::abs(y - prev) > std::abs(-y - prev)) y = -y;
    prev = y;
    worst = std::max(worst, std::abs(s.x - y / ho->alpha));
  }
  return worst;
}

int exit_status(const Error& e) { return is_numerical(e.kind()) ? 2 : 1; }

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "trajectory";
}

std::optional<Task> parse_task(std::string_view name) {
  for (const auto& [t, n] : kTaskNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

std::pair<double, double> parse_t_span(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorKind::ValidationError, "t_span must be t0:t1");
  const auto t0 = parse_real(trim(text.substr(0, colon)));
  const auto t1 = parse_real(trim(text.substr(colon + 1)));
  if (!t0 || !t1) throw Error(ErrorKind::ValidationError, "t_span '" + std::string(text) + "' is not t0:t1");
  return {*t0, *t1};
}

Lattice parse_grid(std::string_view text) {
  auto axis = [&](std::string_view part, double& lo, double& hi, int& count) {
    const auto c1 = part.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : part.find(':', c1 + 1);
    std::optional<double> a, b, n;
    if (c2 != std::string_view::npos) {
      a = parse_real(trim(part.substr(0, c1)));
      b = parse_real(trim(part.substr(c1 + 1, c2 - c1 - 1)));
      n = parse_real(trim(part.substr(c2 + 1)));
    }
    if (!a || !b || !n || *n != std::floor(*n) || std::abs(*n) > 1e7) {
      throw Error(ErrorKind::ValidationError, "grid '" + std::string(text) + "' is not xr0:xr1:n,xi0:xi1:m");
    }
    lo = *a;
    hi = *b;
    count = static_cast<int>(*n);
  };
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw Error(ErrorKind::ValidationError, "grid '" + std::string(text) + "' is not xr0:xr1:n,xi0:xi1:m");
  }
  Lattice lat;
  axis(text.substr(0, comma), lat.re_min, lat.re_max, lat.re_count);
  axis(text.substr(comma + 1), lat.im_min, lat.im_max, lat.im_count);
  return lat;
}

namespace {

json parse_document(std::string_view text) {
  const std::string_view body = trim(text);
  if (body.empty() || body.front() != '{') return parse_key_values(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_error(text, e.byte > 0 ? e.byte - 1 : 0, e.what());
  }
}

}  // namespace

namespace {

void check(const ScenarioConfig& config, bool task_given, Problems& problems) {
  if (config.task != Task::Figures) {
    if (config.state.empty()) {
      problems.add("state is required");
    } else {
      try {
        (void)parse_state(config.state, config.units);
      } catch (const Error& e) {
        problems.add(e.what());
      }
    }
  }
  if (!(config.units.hbar > 0) || !(config.units.mass > 0)) problems.add("hbar and mass must be positive");
  try {
    config.integrator.validate();
  } catch (const Error& e) {
    problems.add(e.what());
  }
  const bool needs_seed = config.task == Task::Trajectory || config.task == Task::Path || config.task == Task::Compare;
  if (task_given && needs_seed && config.seeds.empty()) problems.add("task " + std::string(to_string(config.task)) + " needs at least one seed");
  for (const auto& s : config.seeds) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) problems.add("seeds must be finite");
  }
  if (config.t_span && !(config.t_span->second > config.t_span->first)) problems.add("t_span must have t1 > t0");
  if (config.arc_length && !(*config.arc_length > 0)) problems.add("arc_length must be positive");
  if (config.grid) {
    try {
      config.grid->validate();
    } catch (const Error& e) {
      problems.add(e.what());
    }
  }
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) { return parse_config(text, {}); }

ScenarioConfig parse_config(std::string_view text, std::string_view overrides) {
  json doc = parse_document(text);
  if (!trim(overrides).empty()) {
    if (!doc.is_object()) throw Error(ErrorKind::ParseError, "config 1:1: top level must be an object");
    doc.merge_patch(parse_document(overrides));
  }
  Problems problems;
  ScenarioConfig cfg = from_json(doc, problems);
  check(cfg, doc.contains("task"), problems);
  problems.raise();
  return cfg;
}

void validate(const ScenarioConfig& config) {
  Problems problems;
  check(config, true, problems);
  problems.raise();
}

std::string canonical_json(const ScenarioConfig& config) {
  json j;  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  j["state"] = config.state;
  j["task"] = std::string(to_string(config.task));
  j["units"] = {{"hbar", config.units.hbar}, {"mass", config.units.mass}};
  json seeds = json::array();
  for (const auto& s : config.seeds) seeds.push_back(format_complex(s));
  j["seeds"] = seeds;
  if (config.t_span) j["t_span"] = {config.t_span->first, config.t_span->second};
  if (config.arc_length) j["arc_length"] = *config.arc_length;
  if (config.grid) {
    const Lattice& g = *config.grid;
    j["grid"] = {{"x_r", {g.re_min, g.re_max, g.re_count}}, {"x_i", {g.im_min, g.im_max, g.im_count}}};
  }
  j["integrator"] = integrator_json(config.integrator);
  j["masked"] = config.masked;
  return j.dump();
}

std::string config_hash(const ScenarioConfig& config) { return hex64(fnv1a64(canonical_json(config))); }

std::string header_comments(const ScenarioConfig& config) {
  const IntegratorSettings& s = config.integrator;
  std::string out;
  out += "# cqtraj task=" + std::string(to_string(config.task));
  if (!config.state.empty()) out += " state=" + parse_state(config.state, config.units).to_string();
  out += "\n# config_hash=" + config_hash(config) + "\n";
  out += "# integrator method=" + method_name(s.method) + " rel_tol=" + format_number(s.rel_tol) +
         " abs_tol=" + format_number(s.abs_tol) + " max_step=" + format_number(s.max_step) +
         " node_guard=" + format_number(s.node_guard) + "\n";
  return out;
}

Lattice default_lattice(const StateSpec& spec, int count) {
  Lattice lat;
  lat.re_count = lat.im_count = count;
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    lat.re_min = 0;
    lat.re_max = well->width;
    lat.im_min = -1;
    lat.im_max = 1;
  } else if (const auto* step = spec.get_if<PotentialStep>()) {
    lat.re_min = 0;
    lat.re_max = 2 * std::numbers::pi / step->k;
    lat.im_min = -1 / step->k;
    lat.im_max = 1 / step->k;
  } else if (const auto* wave = spec.get_if<ConstantPotentialWave>()) {
    lat.re_min = 0;
    lat.re_max = 2 * std::numbers::pi / wave->k;
    lat.im_min = -1 / wave->k;
    lat.im_max = 1 / wave->k;
  }
  return lat;
}

ComparisonReport compare_methods(const StateSpec& spec, const std::vector<Complex>& seeds,
                                 const IntegratorSettings& settings) {
  ComparisonReport report;
  report.state = spec.to_string();
  report.settings = settings;
  for (const Complex& seed : seeds) {
    ComparisonRecord rec;
    rec.seed = seed;
    RhoTrace trace;
    try {
      trace = rho_via_trajectory(spec, seed, settings);
    } catch (const Error& e) {
      throw Error(e.kind(), "seed " + format_complex(seed) + ": " + e.what());
    }
    rec.verdict = trace.verdict == Verdict::Defined ? "defined"
                  : trace.verdict == Verdict::Overdetermined ? "overdetermined"
                                                             : "unreached";
    rec.path_constant = trace.path_constant;
    rec.x_r0 = trace.x_r0;
    rec.p0 = trace.p0;
    rec.samples = trace.samples.size();
    for (const auto& s : trace.samples) {
      const double closed = closed_form_rho(spec, s.x, 0.0).rho;
      rec.max_relative_deviation = std::max(rec.max_relative_deviation, std::abs(s.rho - closed) / closed);
    }
    rec.analytic_position_deviation = ho1_analytic_deviation(spec, trace);
    report.global_max_deviation = std::max(report.global_max_deviation, rec.max_relative_deviation);
    report.records.push_back(rec);
  }
  return report;
}

std::string report_json(const ComparisonReport& report) {
  json j;
  j["state"] = report.state;
  j["integrator"] = integrator_json(report.settings);
  j["global_max_relative_deviation"] = report.global_max_deviation;
  json records = json::array();
  for (const auto& r : report.records) {
    json rec;
    rec["seed"] = format_complex(r.seed);
    rec["verdict"] = r.verdict;
    rec["path_constant"] = r.path_constant;
    rec["x_r0"] = r.x_r0;
    rec["P_x_r0"] = r.p0;
    rec["max_relative_deviation"] = r.max_relative_deviation;
    rec["samples"] = r.samples;
    if (r.analytic_position_deviation) rec["analytic_position_deviation"] = *r.analytic_position_deviation;
    records.push_back(rec);
  }
  j["records"] = records;
  return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const std::string& comments) {
  os << comments << "t,x_r,x_i,xdot_r,xdot_i,path_const\n";
  for (const auto& s : trajectory.samples) {
    os << csv_number(s.t) << ',' << csv_number(s.x.real()) << ',' << csv_number(s.x.imag()) << ','
       << csv_number(s.xdot.real()) << ',' << csv_number(s.xdot.imag()) << ','
       << csv_number(path_constant(trajectory.state, s.x)) << '\n';
  }
}

void write_path_csv(std::ostream& os, const PathCurve& path, const std::string& comments) {
  os << comments << "s,x_r,x_i,path_const\n";
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    os << csv_number(path.arc[k]) << ',' << csv_number(path.points[k].real()) << ','
       << csv_number(path.points[k].imag()) << ',' << csv_number(path_constant(path.state, path.points[k])) << '\n';
  }
}

void write_born_csv(std::ostream& os, const RealLineGrid& from_velocity, const RealLineGrid& direct,
                    const std::string& comments) {
  os << comments << "x_r,P_velocity,P_direct\n";
  for (Eigen::Index k = 0; k < from_velocity.points.size(); ++k) {
    os << csv_number(from_velocity.points[k]) << ',' << csv_number(from_velocity.values[k]) << ','
       << csv_number(direct.values[k]) << '\n';
  }
}

void write_field_csv(std::ostream& os, const ProbabilityField& field, bool masked, const std::string& comments) {
  os << comments << "x_r,x_i,rho,mask\n";
  const Lattice& lat = field.lattice;
  for (int ii = 0; ii < lat.im_count; ++ii) {
    for (int ir = 0; ir < lat.re_count; ++ir) {
      const Complex x = lat.point(ir, ii);
      const double rho = masked ? field.masked_rho(ir, ii) : field.rho(ii, ir);
      os << csv_number(x.real()) << ',' << csv_number(x.imag()) << ',' << csv_number(rho) << ','
         << to_string(field.mask_at(ir, ii)) << '\n';
    }
  }
}

void write_poirier_csv(std::ostream& os, const StateSpec& spec, const Lattice& lattice, const std::string& comments) {
  lattice.validate();
  os << comments << "x_r,x_i,rho_c_r,rho_c_i,flux_div_r,flux_div_i\n";
  for (int ii = 0; ii < lattice.im_count; ++ii) {
    for (int ir = 0; ir < lattice.re_count; ++ir) {
      const Complex x = lattice.point(ir, ii);
      const PoirierSample p = poirier_density(spec, x);
      os << csv_number(x.real()) << ',' << csv_number(x.imag()) << ',' << csv_number(p.rho_c.real()) << ','
         << csv_number(p.rho_c.imag()) << ',' << csv_number(p.flux_div.real()) << ','
         << csv_number(p.flux_div.imag()) << '\n';
    }
  }
}

std::vector<std::string> emit_figure_data(const ScenarioConfig& config) {
  struct Figure {
    const char* name;
    const char* state;
    Lattice lattice;
    const char* note;
  };
  const double pi = std::numbers::pi;
  const int n = config.grid ? config.grid->re_count : 201;
  const int m = config.grid ? config.grid->im_count : 201;
  const Figure figures[] = {
      {"fig1_ho_n0", "ho:n=0", {-3, 3, n, -3, 3, m},
       "caption label n=1 differs; values follow the n=0 ground-state formula"},
      {"fig2_ho_n1", "ho:n=1", {-3, 3, n, -3, 3, m},
       "caption label n=2 differs; values follow the n=1 formula, subnest |x^2-1|<1 is overdet"},
      {"fig3_well_n1", "well:n=1,a=3.141592653589793", {0, pi, n, -1, 1, m}, nullptr},
      {"fig4_step", "step:k=1,r=0.70710678118654757", {0, 2 * pi, n, -1, 1, m}, nullptr},
  };
  const std::filesystem::path dir(config.output.empty() ? "figures" : config.output);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const Figure& fig : figures) {
    ScenarioConfig sub = config;
    sub.task = Task::FieldClosed;
    sub.state = fig.state;
    sub.grid = fig.lattice;
    const StateSpec spec = parse_state(sub.state, sub.units);
    const ProbabilityField field = closed_form_field(spec, fig.lattice, sub.integrator.node_guard);
    for (bool masked : {false, true}) {
      sub.masked = masked;
      std::string comments = header_comments(sub) + "# figure=" + fig.name + (masked ? " view=masked\n" : " view=raw\n");
      if (fig.note) comments += std::string("# note: ") + fig.note + "\n";
      const auto path = dir / (std::string(fig.name) + (masked ? "_masked.csv" : ".csv"));
      std::ofstream os(path, std::ios::binary);
      if (!os) throw Error(ErrorKind::ValidationError, "cannot open output file '" + path.string() + "'");
      write_field_csv(os, field, masked, comments);
      written.push_back(path.string());
    }
  }
  return written;
}

int run_scenario(const ScenarioConfig& config, std::ostream& log) {
  try {
    validate(config);
    if (config.task == Task::Figures) {
      for (const auto& path : emit_figure_data(config)) log << "wrote " << path << '\n';
      return 0;
    }
    const StateSpec spec = parse_state(config.state, config.units);
    const std::string comments = header_comments(config);

    auto emit = [&](const std::string& path, auto&& write) {
      auto file = open_output(path);
      std::ostringstream buffer;
      write(buffer);
      (file ? *file : std::cout) << buffer.str();
      if (file) log << "wrote " << path << '\n';
    };

    switch (config.task) {
      case Task::Trajectory:
      case Task::Path:
        for (std::size_t k = 0; k < config.seeds.size(); ++k) {
          const Complex seed = config.seeds[k];
          const std::string seed_comment = comments + "# seed=" + format_complex(seed) + "\n";
          try {
            if (config.task == Task::Trajectory) {
              const Trajectory tr = config.t_span ? integrate_trajectory(spec, seed, *config.t_span, config.integrator)
                                                  : integrate_loop(spec, seed, config.integrator);
              emit(indexed_path(config.output, k + 1, config.seeds.size()),
                   [&](std::ostream& os) { write_trajectory_csv(os, tr, seed_comment); });
            } else {
              const PathCurve path = config.arc_length ? integrate_path(spec, seed, *config.arc_length, config.integrator)
                                                       : integrate_path_loop(spec, seed, config.integrator);
              emit(indexed_path(config.output, k + 1, config.seeds.size()),
                   [&](std::ostream& os) { write_path_csv(os, path, seed_comment); });
            }
          } catch (const Error& e) {
            throw Error(e.kind(), "seed " + format_complex(seed) + ": " + e.what());
          }
        }
        break;
      case Task::Born: {
        const auto span = config.grid ? std::pair{config.grid->re_min, config.grid->re_max} : default_real_span(spec);
        const int count = config.grid ? config.grid->re_count : 2001;
        const auto points = real_grid(spec, span, count, config.integrator.node_guard);
        const double anchor = points[points.size() / 2];
        const RealLineGrid v = born_from_velocity(spec, points, anchor, config.integrator.node_guard);
        const RealLineGrid d = born_direct_grid(spec, points);
        emit(config.output, [&](std::ostream& os) { write_born_csv(os, v, d, comments); });
        break;
      }
      case Task::FieldClosed:
      case Task::FieldTrajectory: {
        const Lattice lat = config.grid ? *config.grid : default_lattice(spec);
        const ProbabilityField field = config.task == Task::FieldClosed
                                           ? closed_form_field(spec, lat, config.integrator.node_guard)
                                           : trajectory_field(spec, lat, config.integrator);
        emit(config.output, [&](std::ostream& os) { write_field_csv(os, field, config.masked, comments); });
        break;
      }
      case Task::Poirier: {
        const Lattice lat = config.grid ? *config.grid : default_lattice(spec);
        emit(config.output, [&](std::ostream& os) { write_poirier_csv(os, spec, lat, comments); });
        break;
      }
      case Task::Compare: {
        const ComparisonReport report = compare_methods(spec, config.seeds, config.integrator);
        emit(config.output, [&](std::ostream& os) { os << report_json(report); });
        break;
      }
      case Task::Figures:
        break;
    }
    return 0;
  } catch (const Error& e) {
    log << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_status(e);
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error [ValidationError]: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cqt
