#include "passive_admittance/scenario_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace passive_admittance {

// Generated from scenarios/*.yaml at configure time.
extern const std::vector<BundledScenario>& corpus_data();

namespace {

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                const std::string& section) {
  if (!map.IsMap()) {
    throw ParseError(line_of(map), "'" + section + "' must be a mapping");
  }
  for (const auto& entry : map) {
    const auto key = entry.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(line_of(entry.first),
                       "unknown key '" + key + "'" + (section.empty() ? "" : " in '" + section + "'"));
    }
  }
}

double as_double(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ParseError(line_of(node), field + " must be a number");
  const auto text = node.as<std::string>();
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    if (text == ".inf" || text == "inf") return HUGE_VAL;
    throw ParseError(line_of(node), field + " must be a number, got '" + text + "'");
  }
  return value;
}

bool as_bool(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    throw ParseError(line_of(node), field + " must be true or false");
  }
}

std::string as_string(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ParseError(line_of(node), field + " must be a string");
  return node.as<std::string>();
}

DofVector as_vector(const YAML::Node& node, const std::string& field, std::size_t n) {
  if (!node.IsSequence()) throw ParseError(line_of(node), field + " must be a list");
  if (node.size() != n) {
    throw ValidationError(field, "needs " + std::to_string(n) + " entries, got " +
                                     std::to_string(node.size()));
  }
  DofVector out(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out[static_cast<Eigen::Index>(j)] = as_double(node[j], field);
  }
  return out;
}

template <typename Enum, typename Convert>
Enum as_enum(const YAML::Node& node, const std::string& field, Convert convert) {
  const std::string text = as_string(node, field);
  try {
    return convert(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_of(node), field + ": " + e.what());
  }
}

void parse_arm(const YAML::Node& node, Scenario& sc) {
  const std::size_t n = sc.layout.size();
  check_keys(node,
             {"stiffness", "damping", "sensor_delay", "force_noise", "waypoints", "sinusoid",
              "stiffening"},
             "arm");
  ArmModel& arm = sc.arm;
  if (node["stiffness"]) arm.k_h = as_vector(node["stiffness"], "arm.stiffness", n);
  if (node["damping"]) arm.d_h = as_vector(node["damping"], "arm.damping", n);
  if (node["sensor_delay"]) {
    const double delay = as_double(node["sensor_delay"], "arm.sensor_delay");
    if (delay != std::floor(delay)) {
      throw ValidationError("arm.sensor_delay", "must be a whole number of ticks");
    }
    arm.sensor_delay = static_cast<int>(delay);
  }
  if (node["force_noise"]) arm.force_noise = as_double(node["force_noise"], "arm.force_noise");
  if (const auto list = node["waypoints"]) {
    if (!list.IsSequence()) throw ParseError(line_of(list), "arm.waypoints must be a list");
    arm.waypoints.clear();
    for (const auto& item : list) {
      check_keys(item, {"t", "x"}, "arm.waypoints");
      if (!item["t"] || !item["x"]) {
        throw ParseError(line_of(item), "each waypoint needs 't' and 'x'");
      }
      arm.waypoints.push_back(
          {as_double(item["t"], "arm.waypoints.t"), as_vector(item["x"], "arm.waypoints.x", n)});
    }
  }
  if (const auto sine = node["sinusoid"]) {
    check_keys(sine, {"amplitude", "frequency", "phase"}, "arm.sinusoid");
    Sinusoid s;
    s.amplitude = DofVector::Zero(static_cast<Eigen::Index>(n));
    if (sine["amplitude"]) s.amplitude = as_vector(sine["amplitude"], "arm.sinusoid.amplitude", n);
    if (sine["frequency"]) s.frequency = as_double(sine["frequency"], "arm.sinusoid.frequency");
    if (sine["phase"]) s.phase = as_double(sine["phase"], "arm.sinusoid.phase");
    arm.sinusoid = s;
  }
  if (const auto list = node["stiffening"]) {
    if (!list.IsSequence()) throw ParseError(line_of(list), "arm.stiffening must be a list");
    arm.stiffening.clear();
    for (const auto& item : list) {
      check_keys(item, {"start", "end", "stiffness"}, "arm.stiffening");
      if (!item["start"] || !item["end"] || !item["stiffness"]) {
        throw ParseError(line_of(item), "each stiffening event needs start, end and stiffness");
      }
      arm.stiffening.push_back({as_double(item["start"], "arm.stiffening.start"),
                                as_double(item["end"], "arm.stiffening.end"),
                                as_vector(item["stiffness"], "arm.stiffening.stiffness", n)});
    }
  }
}

Scenario from_yaml(const YAML::Node& root) {
  if (!root || root.IsNull()) {
    Scenario sc = Scenario::defaults();
    validate_scenario(sc);
    return sc;
  }
  check_keys(root,
             {"name", "duration", "seed", "dofs", "integrator", "params", "detector", "limits",
              "tank", "adaptation", "tracking", "arm"},
             "");

  DofLayout layout;
  if (const auto dofs = root["dofs"]) {
    if (!dofs.IsSequence()) throw ParseError(line_of(dofs), "dofs must be a list");
    std::vector<DofKind> kinds;
    for (const auto& item : dofs) {
      kinds.push_back(as_enum<DofKind>(item, "dofs", dof_kind_from_string));
    }
    if (kinds.empty()) throw ValidationError("dofs", "needs at least one DOF");
    layout = DofLayout(std::move(kinds));
  }
  Scenario sc = Scenario::defaults(layout);
  const std::size_t n = layout.size();

  if (root["name"]) sc.name = as_string(root["name"], "name");
  if (root["duration"]) sc.duration = as_double(root["duration"], "duration");
  if (root["seed"]) {
    const double seed = as_double(root["seed"], "seed");
    if (seed < 0 || seed != std::floor(seed)) throw ValidationError("seed", "must be a whole number");
    sc.seed = static_cast<std::uint64_t>(seed);
  }
  if (const auto node = root["integrator"]) {
    check_keys(node, {"dt"}, "integrator");
    if (node["dt"]) sc.integrator.dt = as_double(node["dt"], "integrator.dt");
  }
  if (const auto node = root["params"]) {
    check_keys(node, {"inertia", "damping"}, "params");
    if (node["inertia"]) sc.params.m = as_vector(node["inertia"], "params.inertia", n);
    if (node["damping"]) sc.params.d = as_vector(node["damping"], "params.damping", n);
  }
  if (const auto node = root["detector"]) {
    check_keys(node, {"epsilon", "window", "accel_cutoff"}, "detector");
    if (node["epsilon"]) sc.detector.epsilon = as_double(node["epsilon"], "detector.epsilon");
    if (node["window"]) sc.detector.window = as_double(node["window"], "detector.window");
    if (node["accel_cutoff"]) {
      sc.detector.accel_cutoff = as_double(node["accel_cutoff"], "detector.accel_cutoff");
    }
  }
  if (const auto node = root["limits"]) {
    check_keys(node, {"velocity", "tank_floor", "tank_ceiling"}, "limits");
    if (node["velocity"]) sc.limits.v_max = as_vector(node["velocity"], "limits.velocity", n);
    if (node["tank_floor"]) sc.limits.delta = as_double(node["tank_floor"], "limits.tank_floor");
    if (node["tank_ceiling"]) {
      sc.limits.t_bar = as_double(node["tank_ceiling"], "limits.tank_ceiling");
    }
  }
  if (const auto node = root["tank"]) {
    check_keys(node, {"initial_energy", "split_metering"}, "tank");
    if (node["initial_energy"]) {
      sc.tank_initial = as_double(node["initial_energy"], "tank.initial_energy");
    }
    if (node["split_metering"]) {
      sc.split_metering = as_bool(node["split_metering"], "tank.split_metering");
    }
  }
  if (const auto node = root["adaptation"]) {
    check_keys(node,
               {"enabled", "mode", "damping_mode", "trigger", "interval", "inertia_cap", "dwell"},
               "adaptation");
    auto& ad = sc.adaptation;
    if (node["enabled"]) ad.enabled = as_bool(node["enabled"], "adaptation.enabled");
    if (node["mode"]) {
      ad.mode = as_enum<AdaptationMode>(node["mode"], "adaptation.mode", adaptation_mode_from_string);
    }
    if (node["damping_mode"]) {
      ad.damping_mode = as_enum<DampingMode>(node["damping_mode"], "adaptation.damping_mode",
                                             damping_mode_from_string);
    }
    if (node["trigger"]) {
      ad.trigger = as_enum<TriggerMode>(node["trigger"], "adaptation.trigger", trigger_mode_from_string);
    }
    if (node["interval"]) ad.dt_adapt = as_double(node["interval"], "adaptation.interval");
    if (node["inertia_cap"]) {
      ad.delta_m_cap = as_vector(node["inertia_cap"], "adaptation.inertia_cap", n);
    }
    if (node["dwell"]) ad.dwell = as_double(node["dwell"], "adaptation.dwell");
  }
  if (const auto node = root["tracking"]) {
    check_keys(node, {"enabled", "natural_frequency", "damping_ratio"}, "tracking");
    if (node["enabled"]) sc.tracking.enabled = as_bool(node["enabled"], "tracking.enabled");
    if (node["natural_frequency"]) {
      sc.tracking.natural_frequency =
          as_double(node["natural_frequency"], "tracking.natural_frequency");
    }
    if (node["damping_ratio"]) {
      sc.tracking.damping_ratio = as_double(node["damping_ratio"], "tracking.damping_ratio");
    }
  }
  if (const auto node = root["arm"]) parse_arm(node, sc);

  validate_scenario(sc);
  return sc;
}

std::string shortest(double value) {
  if (std::isinf(value)) return value > 0 ? ".inf" : "-.inf";
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

std::string yaml_vector(const DofVector& v) {
  std::string out = "[";
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (j > 0) out += ", ";
    out += shortest(v[j]);
  }
  return out + "]";
}

}  // namespace

Scenario parse_scenario_text(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
  try {
    return from_yaml(root);
  } catch (const YAML::Exception& e) {
    throw ParseError(e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

std::string write_scenario_yaml(const Scenario& sc) {
  std::ostringstream out;
  out << "name: " << sc.name << "\n";
  out << "duration: " << shortest(sc.duration) << "\n";
  out << "seed: " << sc.seed << "\n";
  out << "dofs: [";
  for (std::size_t j = 0; j < sc.layout.size(); ++j) {
    out << (j > 0 ? ", " : "") << to_string(sc.layout.kind(j));
  }
  out << "]\n";
  out << "integrator:\n  dt: " << shortest(sc.integrator.dt) << "\n";
  out << "params:\n  inertia: " << yaml_vector(sc.params.m)
      << "\n  damping: " << yaml_vector(sc.params.d) << "\n";
  out << "detector:\n  epsilon: " << shortest(sc.detector.epsilon)
      << "\n  window: " << shortest(sc.detector.window)
      << "\n  accel_cutoff: " << shortest(sc.detector.accel_cutoff) << "\n";
  out << "limits:\n  velocity: " << yaml_vector(sc.limits.v_max)
      << "\n  tank_floor: " << shortest(sc.limits.delta)
      << "\n  tank_ceiling: " << shortest(sc.limits.t_bar) << "\n";
  out << "tank:\n  initial_energy: " << shortest(sc.tank_initial)
      << "\n  split_metering: " << (sc.split_metering ? "true" : "false") << "\n";
  const auto& ad = sc.adaptation;
  out << "adaptation:\n  enabled: " << (ad.enabled ? "true" : "false")
      << "\n  mode: " << to_string(ad.mode) << "\n  damping_mode: " << to_string(ad.damping_mode)
      << "\n  trigger: " << to_string(ad.trigger) << "\n  interval: " << shortest(ad.dt_adapt)
      << "\n  inertia_cap: " << yaml_vector(ad.delta_m_cap) << "\n  dwell: " << shortest(ad.dwell)
      << "\n";
  out << "tracking:\n  enabled: " << (sc.tracking.enabled ? "true" : "false")
      << "\n  natural_frequency: " << shortest(sc.tracking.natural_frequency)
      << "\n  damping_ratio: " << shortest(sc.tracking.damping_ratio) << "\n";
  const auto& arm = sc.arm;
  out << "arm:\n  stiffness: " << yaml_vector(arm.k_h) << "\n  damping: " << yaml_vector(arm.d_h)
      << "\n  sensor_delay: " << arm.sensor_delay
      << "\n  force_noise: " << shortest(arm.force_noise) << "\n";
  out << "  waypoints:" << (arm.waypoints.empty() ? " []" : "") << "\n";
  for (const auto& wp : arm.waypoints) {
    out << "    - {t: " << shortest(wp.t) << ", x: " << yaml_vector(wp.x) << "}\n";
  }
  if (arm.sinusoid) {
    out << "  sinusoid:\n    amplitude: " << yaml_vector(arm.sinusoid->amplitude)
        << "\n    frequency: " << shortest(arm.sinusoid->frequency)
        << "\n    phase: " << shortest(arm.sinusoid->phase) << "\n";
  }
  out << "  stiffening:" << (arm.stiffening.empty() ? " []" : "") << "\n";
  for (const auto& event : arm.stiffening) {
    out << "    - {start: " << shortest(event.t_start) << ", end: " << shortest(event.t_end)
        << ", stiffness: " << yaml_vector(event.k_stiff) << "}\n";
  }
  return out.str();
}

const std::vector<BundledScenario>& bundled_scenarios() { return corpus_data(); }

Scenario resolve_scenario(const std::string& name_or_path) {
  const BundledScenario* prefixed = nullptr;
  int prefix_matches = 0;
  for (const auto& entry : bundled_scenarios()) {
    if (entry.name == name_or_path) return parse_scenario_text(entry.text);
    if (entry.name.rfind(name_or_path + "_", 0) == 0) {
      prefixed = &entry;
      ++prefix_matches;
    }
  }
  if (std::filesystem::is_regular_file(name_or_path)) return parse_scenario(name_or_path);
  if (prefix_matches == 1) return parse_scenario_text(prefixed->text);
  throw ValidationError("scenario", "no bundled scenario or file named '" + name_or_path + "'");
}

std::vector<std::string> trace_columns(std::size_t n) {
  std::vector<std::string> cols{"t"};
  auto block = [&](const char* prefix) {
    for (std::size_t j = 0; j < n; ++j) cols.push_back(prefix + std::to_string(j));
  };
  block("x");
  block("v");
  block("a");
  block("f");
  cols.insert(cols.end(), {"psi", "psi_avg", "flag"});
  block("m");
  block("d");
  cols.insert(cols.end(), {"tank_T", "phi", "gamma", "p_d", "p_m", "adapting"});
  return cols;
}

std::string format_decimal(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
  const int decimals = std::clamp(8 - exponent, 0, 60);
  std::array<char, 512> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                       std::chars_format::fixed, decimals);
  std::string text(buffer.data(), ptr);
  if (text.find('.') != std::string::npos) {
    while (text.back() == '0') text.pop_back();
    if (text.back() == '.') text.pop_back();
  }
  if (text == "-0") text = "0";
  return text;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  const auto cols = trace_columns(trace.dofs);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  auto vec = [&out](const DofVector& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) out << ',' << format_decimal(v[j]);
  };
  for (const auto& rec : trace.records) {
    out << format_decimal(rec.t);
    vec(rec.x);
    vec(rec.v);
    vec(rec.a_est);
    vec(rec.f_ext);
    out << ',' << format_decimal(rec.psi) << ',' << format_decimal(rec.psi_avg) << ','
        << (rec.flag ? 1 : 0);
    vec(rec.m);
    vec(rec.d);
    out << ',' << format_decimal(rec.tank_T) << ',' << rec.phi << ',' << rec.gamma << ','
        << format_decimal(rec.p_d) << ',' << format_decimal(rec.p_m) << ','
        << (rec.adapting ? 1 : 0) << '\n';
  }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(trace, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view text, int line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, "bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Trace read_trace_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(1, "empty trace file");
  const auto names = split_commas(header);
  std::size_t n = 0;
  while (std::find(names.begin(), names.end(), "x" + std::to_string(n)) != names.end()) ++n;
  const auto expected = trace_columns(n);
  if (names.size() != expected.size() ||
      !std::equal(names.begin(), names.end(), expected.begin())) {
    throw ParseError(1, "header does not match the trace schema");
  }

  Trace trace;
  trace.dofs = n;
  std::string line;
  int line_number = 1;
  const auto size = static_cast<Eigen::Index>(n);
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != expected.size()) throw ParseError(line_number, "wrong column count");
    std::size_t c = 0;
    auto next = [&]() { return parse_number(cells[c++], line_number); };
    auto vec = [&]() {
      DofVector v(size);
      for (Eigen::Index j = 0; j < size; ++j) v[j] = next();
      return v;
    };
    TraceRecord rec;
    rec.t = next();
    rec.x = vec();
    rec.v = vec();
    rec.a_est = vec();
    rec.f_ext = vec();
    rec.psi = next();
    rec.psi_avg = next();
    rec.flag = next() != 0.0;
    rec.m = vec();
    rec.d = vec();
    rec.tank_T = next();
    rec.phi = static_cast<int>(next());
    rec.gamma = static_cast<int>(next());
    rec.p_d = next();
    rec.p_m = next();
    rec.adapting = next() != 0.0;
    trace.records.push_back(std::move(rec));
  }
  if (trace.records.size() >= 2) trace.dt = trace.records[1].t - trace.records[0].t;
  return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace " + path.string());
  return read_trace_csv(in);
}

}  // namespace passive_admittance
