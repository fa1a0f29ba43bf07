#include "fpsi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fpsi {

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Example1: return "example1";
    case ExperimentKind::Example2: return "example2";
    case ExperimentKind::Custom: return "custom";
  }
  return "?";
}

ExperimentKind experiment_from_string(const std::string& s) {
  if (s == "example1") return ExperimentKind::Example1;
  if (s == "example2") return ExperimentKind::Example2;
  if (s == "custom") return ExperimentKind::Custom;
  throw ConfigError("experiment: unknown value '" + s + "' (expected example1, example2 or custom)");
}

RunConfig default_config(ExperimentKind kind) {
  RunConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::Example1:
      c.dts = {0.2, 0.1, 0.05, 0.025, 0.0125};
      c.T = 1.0;
      c.iteration.eps = 1e-5;
      break;
    case ExperimentKind::Example2: {
      const Example2Setup s;
      c.dts = {1e-4};
      c.T = 0.021;
      c.nx = s.nx;
      c.ny_fluid = s.ny_fluid;
      c.ny_wall = s.ny_wall;
      c.darcy = s.darcy;
      c.params = s.params;
      c.pulse = s.pulse;
      c.slice_times = {0.007, 0.014, 0.021};
      c.iteration.eps = 1e-5;
      break;
    }
    case ExperimentKind::Custom:
      c.dts = {0.1};
      c.T = 1.0;
      c.n = 8;
      break;
  }
  return c;
}

namespace {

struct Value {
  enum Kind { Number, Bool, String, Array } kind = Number;
  double number = 0.0;
  bool flag = false;
  std::string text;
  std::vector<Value> items;
  int line = 0;
};

[[noreturn]] void fail(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Value parse_scalar(const std::string& raw, const std::string& key, int line) {
  Value v;
  v.line = line;
  if (raw.empty()) fail(key, "missing value (line " + std::to_string(line) + ")");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') fail(key, "unterminated string (line " + std::to_string(line) + ")");
    v.kind = Value::String;
    v.text = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Bool;
    v.flag = raw == "true";
    return v;
  }
  std::size_t used = 0;
  try {
    v.number = std::stod(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != raw.size()) fail(key, "cannot parse '" + raw + "' (line " + std::to_string(line) + ")");
  v.kind = Value::Number;
  return v;
}

Value parse_value(const std::string& raw, const std::string& key, int line) {
  if (raw.empty() || raw.front() != '[') return parse_scalar(raw, key, line);
  if (raw.back() != ']') fail(key, "unterminated array (line " + std::to_string(line) + ")");
  Value v;
  v.kind = Value::Array;
  v.line = line;
  std::stringstream ss(raw.substr(1, raw.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    v.items.push_back(parse_scalar(item, key, line));
  }
  return v;
}

using Entries = std::vector<std::pair<std::string, Value>>;

Entries tokenize(const std::string& text) {
  Entries out;
  std::map<std::string, int> seen;
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header on line " + std::to_string(line));
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value' on line " + std::to_string(line));
    const std::string name = trim(s.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    if (auto [it, fresh] = seen.emplace(key, line); !fresh)
      fail(key, "duplicate key (lines " + std::to_string(it->second) + " and " + std::to_string(line) + ")");
    out.emplace_back(key, parse_value(trim(s.substr(eq + 1)), key, line));
  }
  return out;
}

double as_number(const std::string& key, const Value& v) {
  if (v.kind != Value::Number) fail(key, "expected a number");
  return v.number;
}

int as_int(const std::string& key, const Value& v) {
  const double x = as_number(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) fail(key, "expected an integer");
  return static_cast<int>(x);
}

bool as_bool(const std::string& key, const Value& v) {
  if (v.kind != Value::Bool) fail(key, "expected true or false");
  return v.flag;
}

std::string as_string(const std::string& key, const Value& v) {
  if (v.kind != Value::String) fail(key, "expected a quoted string");
  return v.text;
}

std::vector<double> as_numbers(const std::string& key, const Value& v) {
  if (v.kind == Value::Number) return {v.number};
  if (v.kind != Value::Array) fail(key, "expected a number or an array of numbers");
  std::vector<double> out;
  for (const Value& x : v.items) out.push_back(as_number(key, x));
  return out;
}

DarcyPair darcy_from_string(const std::string& key, const std::string& s) {
  if (s == "RT0" || s == "RT0P0") return DarcyPair::RT0P0;
  if (s == "RT1" || s == "RT1P1dc") return DarcyPair::RT1P1dc;
  fail(key, "unknown element pair '" + s + "' (expected RT0 or RT1)");
}

using Setter = std::function<void(RunConfig&, const std::string&, const Value&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [&t](const std::string& key, double RunConfig::*field) {
      t[key] = [field](RunConfig& c, const std::string& k, const Value& v) { c.*field = as_number(k, v); };
    };
    auto param = [&t](const std::string& name, double PhysicalParams::*field) {
      t["params." + name] = [field](RunConfig& c, const std::string& k, const Value& v) {
        c.params.*field = as_number(k, v);
      };
    };
    auto integer = [&t](const std::string& key, int RunConfig::*field) {
      t[key] = [field](RunConfig& c, const std::string& k, const Value& v) { c.*field = as_int(k, v); };
    };
    auto flag = [&t](const std::string& key, bool RunConfig::*field) {
      t[key] = [field](RunConfig& c, const std::string& k, const Value& v) { c.*field = as_bool(k, v); };
    };

    t["experiment"] = [](RunConfig&, const std::string&, const Value&) {};  // read first
    t["scheme"] = [](RunConfig& c, const std::string& k, const Value& v) {
      try {
        c.scheme = scheme_from_string(as_string(k, v));
      } catch (const ConfigError& e) {
        fail(k, e.what());
      }
    };
    t["dt"] = [](RunConfig& c, const std::string& k, const Value& v) { c.dts = {as_number(k, v)}; };
    t["dts"] = [](RunConfig& c, const std::string& k, const Value& v) { c.dts = as_numbers(k, v); };
    num("T", &RunConfig::T);

    integer("mesh.n", &RunConfig::n);
    integer("mesh.nx", &RunConfig::nx);
    integer("mesh.ny_fluid", &RunConfig::ny_fluid);
    integer("mesh.ny_wall", &RunConfig::ny_wall);
    t["mesh.darcy"] = [](RunConfig& c, const std::string& k, const Value& v) {
      c.darcy = darcy_from_string(k, as_string(k, v));
    };

    param("mu_f", &PhysicalParams::mu_f);
    param("rho_f", &PhysicalParams::rho_f);
    param("rho_p", &PhysicalParams::rho_p);
    param("mu_p", &PhysicalParams::mu_p);
    param("lambda_p", &PhysicalParams::lambda_p);
    param("s0", &PhysicalParams::s0);
    param("alpha", &PhysicalParams::alpha);
    param("alpha_BJS", &PhysicalParams::alpha_BJS);
    param("gamma_BJS", &PhysicalParams::gamma_BJS);
    param("gamma_f", &PhysicalParams::gamma_f);
    param("gamma_p", &PhysicalParams::gamma_p);
    param("beta", &PhysicalParams::beta);
    t["params.gamma"] = [](RunConfig& c, const std::string& k, const Value& v) {
      c.params.gamma_f = c.params.gamma_p = as_number(k, v);
    };
    t["params.K"] = [](RunConfig& c, const std::string& k, const Value& v) {
      const std::vector<double> x = as_numbers(k, v);
      if (x.size() == 1) {
        c.params.K = x[0] * Eigen::Matrix2d::Identity();
      } else if (x.size() == 4) {
        c.params.K << x[0], x[1], x[2], x[3];
      } else {
        fail(k, "expected a scalar or [Kxx, Kxy, Kyx, Kyy]");
      }
    };
    t["params.quasistatic_fluid"] = [](RunConfig& c, const std::string& k, const Value& v) {
      c.params.quasistatic_fluid = as_bool(k, v);
    };
    t["params.allow_zero_storativity"] = [](RunConfig& c, const std::string& k, const Value& v) {
      c.params.allow_zero_storativity = as_bool(k, v);
    };

    flag("problem.flux_sides", &RunConfig::flux_sides);
    flag("problem.honor_bjs", &RunConfig::honor_bjs);
    t["problem.P_max"] = [](RunConfig& c, const std::string& k, const Value& v) { c.pulse.P_max = as_number(k, v); };
    t["problem.T_max"] = [](RunConfig& c, const std::string& k, const Value& v) { c.pulse.T_max = as_number(k, v); };

    t["iteration.eps"] = [](RunConfig& c, const std::string& k, const Value& v) { c.iteration.eps = as_number(k, v); };
    t["iteration.k_max"] = [](RunConfig& c, const std::string& k, const Value& v) { c.iteration.k_max = as_int(k, v); };
    t["iteration.fixed"] = [](RunConfig& c, const std::string& k, const Value& v) { c.iteration.fixed = as_bool(k, v); };

    t["output.dir"] = [](RunConfig& c, const std::string& k, const Value& v) { c.out_dir = as_string(k, v); };
    flag("output.vtk", &RunConfig::write_vtk);
    integer("output.vtk_every", &RunConfig::vtk_every);
    flag("output.jsonl", &RunConfig::write_jsonl);
    flag("output.mu", &RunConfig::write_mu);
    t["output.slice_times"] = [](RunConfig& c, const std::string& k, const Value& v) {
      c.slice_times = as_numbers(k, v);
    };
    return t;
  }();
  return table;
}

// Shortest text that parses back to the same double.
struct Shortest {
  double x;
  friend std::ostream& operator<<(std::ostream& os, Shortest s) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, s.x);
    return os.write(buf, res.ptr - buf);
  }
};

bool integral_steps(double T, double dt) {
  const double N = T / dt;
  return std::abs(N - std::round(N)) <= 1e-9 * std::max(1.0, N);
}

}  // namespace

RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  Entries entries = tokenize(text);
  for (const auto& [key, raw] : overrides) {
    const std::string t = trim(raw);
    Value v;
    const bool bare = !t.empty() && t.front() != '"' && t.front() != '[' && t != "true" && t != "false" &&
                      (std::isalpha(static_cast<unsigned char>(t.front())) || t.front() == '_' || t.front() == '.' ||
                       t.front() == '/');
    if (bare && !(t == "inf" || t == "nan")) {
      v.kind = Value::String;
      v.text = t;
    } else {
      v = parse_value(t, key, 0);
    }
    std::vector<std::string> replaced{key};
    if (key == "dt") replaced.push_back("dts");
    if (key == "dts") replaced.push_back("dt");
    if (key == "params.gamma") replaced.insert(replaced.end(), {"params.gamma_f", "params.gamma_p"});
    std::erase_if(entries, [&](const auto& e) {
      return std::find(replaced.begin(), replaced.end(), e.first) != replaced.end();
    });
    entries.emplace_back(key, v);
  }

  ExperimentKind kind = ExperimentKind::Example1;
  for (const auto& [key, v] : entries)
    if (key == "experiment") kind = experiment_from_string(as_string(key, v));
  RunConfig c = default_config(kind);

  const auto& table = setters();
  bool has_dt = false, has_dts = false;
  // The shared Robin parameter goes first so gamma_f / gamma_p can refine it.
  for (const auto& [key, v] : entries)
    if (key == "params.gamma") table.at(key)(c, key, v);
  for (const auto& [key, v] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) fail(key, v.line > 0 ? "unknown key (line " + std::to_string(v.line) + ")" : "unknown key");
    if (key == "params.gamma") continue;
    has_dt |= key == "dt";
    has_dts |= key == "dts";
    it->second(c, key, v);
  }
  if (has_dt && has_dts) throw ConfigError("dt: give either dt or dts, not both");
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate(const RunConfig& c) {
  try {
    c.params.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  if (c.dts.empty()) fail("dts", "at least one time step is required");
  if (!(c.T >= 0.0) || !std::isfinite(c.T)) fail("T", "must be >= 0");
  for (double dt : c.dts) {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dts", "time steps must be > 0");
    if (!integral_steps(c.T, dt)) fail("dts", "T / dt must be an integer for every dt");
  }
  if (c.experiment != ExperimentKind::Example1 && c.dts.size() != 1)
    fail("dts", "only example1 accepts a series of time steps");
  if (c.n < 1) fail("mesh.n", "must be >= 1");
  if (c.nx < 1) fail("mesh.nx", "must be >= 1");
  if (c.ny_fluid < 1) fail("mesh.ny_fluid", "must be >= 1");
  if (c.ny_wall < 1) fail("mesh.ny_wall", "must be >= 1");
  if (!(c.pulse.T_max > 0.0)) fail("problem.T_max", "must be > 0");
  if (!(c.iteration.eps > 0.0)) fail("iteration.eps", "must be > 0");
  if (c.iteration.k_max < 1) fail("iteration.k_max", "must be >= 1");
  if (c.vtk_every < 0) fail("output.vtk_every", "must be >= 0");
  if (c.out_dir.empty()) fail("output.dir", "must not be empty");
  for (double t : c.slice_times)
    if (!(t >= 0.0 && t <= c.T * (1.0 + 1e-12))) fail("output.slice_times", "times must lie in [0, T]");
  if (c.scheme == SchemeKind::Monolithic) {
    if (c.params.gamma_f != c.params.gamma_p) fail("params.gamma_p", "the monolithic scheme needs gamma_f == gamma_p");
    if (c.params.gamma_BJS > 0.0 || c.honor_bjs) fail("params.gamma_BJS", "the monolithic scheme needs gamma_BJS = 0");
  }
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream os;
  const auto list = [&os](const std::vector<double>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << Shortest{v[i]};
    os << ']';
  };
  const auto b = [](bool x) { return x ? "true" : "false"; };
  const PhysicalParams& p = c.params;
  os << "experiment = \"" << to_string(c.experiment) << "\"\n";
  os << "scheme = \"" << to_string(c.scheme) << "\"\n";
  os << "dts = ";
  list(c.dts);
  os << "\nT = " << Shortest{c.T} << "\n\n[mesh]\n";
  os << "n = " << c.n << "\nnx = " << c.nx << "\nny_fluid = " << c.ny_fluid << "\nny_wall = " << c.ny_wall << '\n';
  os << "darcy = \"" << (c.darcy == DarcyPair::RT0P0 ? "RT0" : "RT1") << "\"\n\n[params]\n";
  os << "mu_f = " << Shortest{p.mu_f} << "\nrho_f = " << Shortest{p.rho_f} << "\nrho_p = " << Shortest{p.rho_p} << "\nmu_p = " << Shortest{p.mu_p}
     << "\nlambda_p = " << Shortest{p.lambda_p} << "\ns0 = " << Shortest{p.s0} << "\nK = ";
  list({p.K(0, 0), p.K(0, 1), p.K(1, 0), p.K(1, 1)});
  os << "\nalpha = " << Shortest{p.alpha} << "\nalpha_BJS = " << Shortest{p.alpha_BJS} << "\ngamma_BJS = " << Shortest{p.gamma_BJS}
     << "\ngamma_f = " << Shortest{p.gamma_f} << "\ngamma_p = " << Shortest{p.gamma_p} << "\nbeta = " << Shortest{p.beta}
     << "\nquasistatic_fluid = " << b(p.quasistatic_fluid)
     << "\nallow_zero_storativity = " << b(p.allow_zero_storativity) << "\n\n[problem]\n";
  os << "flux_sides = " << b(c.flux_sides) << "\nhonor_bjs = " << b(c.honor_bjs) << "\nP_max = " << Shortest{c.pulse.P_max}
     << "\nT_max = " << Shortest{c.pulse.T_max} << "\n\n[iteration]\n";
  os << "eps = " << Shortest{c.iteration.eps} << "\nk_max = " << c.iteration.k_max << "\nfixed = " << b(c.iteration.fixed)
     << "\n\n[output]\n";
  os << "dir = \"" << c.out_dir << "\"\nvtk = " << b(c.write_vtk) << "\nvtk_every = " << c.vtk_every
     << "\njsonl = " << b(c.write_jsonl) << "\nmu = " << b(c.write_mu) << "\nslice_times = ";
  list(c.slice_times);
  os << '\n';
  return os.str();
}

}  // namespace fpsi
