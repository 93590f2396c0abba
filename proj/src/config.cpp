#include "stdg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace stdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected a real number, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

struct Entry {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Entry real(const char* sec, const char* key, double& x) {
  return {sec, key, [&x](const std::string& v) { x = parse_real(v); }, [&x] { return format_real(x); }};
}
Entry integer(const char* sec, const char* key, int& x) {
  return {sec, key, [&x](const std::string& v) { x = parse_int(v); }, [&x] { return std::to_string(x); }};
}
Entry boolean(const char* sec, const char* key, bool& x) {
  return {sec, key, [&x](const std::string& v) { x = parse_bool(v); }, [&x] { return format_bool(x); }};
}

std::vector<Entry> entries(RunConfig& c) {
  auto& m = c.model;
  auto& ex = c.experiment;
  std::vector<Entry> e{
      real("model", "alpha", m.alpha),
      real("model", "beta", m.beta),
      real("model", "gamma", m.gamma),
      real("model", "delta", m.delta),
      real("model", "epsilon", m.epsilon),
      real("model", "zeta", m.zeta),
      real("model", "eta", m.eta),
      real("model", "theta", m.theta),
      real("model", "c_sigma", m.c_sigma),
      integer("model", "theta_ip", m.theta_ip),
      boolean("model", "degree_penalty", c.forms.degree_penalty),
      integer("mesh", "n_r", c.mesh.n_r),
      real("mesh", "ratio", c.mesh.ratio),
      {"mesh", "neumann", [&c](const std::string& v) { c.mesh.neumann = split(v, ','); },
       [&c] { return join(c.mesh.neumann); }},
      integer("degrees", "p", c.degrees.p),
      integer("degrees", "q", c.degrees.q),
      integer("degrees", "ceiling", c.degrees.ceiling),
      real("newton", "c_tol", c.newton.c_tol),
      integer("newton", "max_iter", c.newton.max_iter),
      boolean("newton", "damping", c.newton.damping),
      boolean("newton", "verify_oracle", c.newton.verify_oracle),
      boolean("newton", "marching", c.newton.marching),
      {"newton", "initial_guess",
       [&c](const std::string& v) {
         if (v != "zero" && v != "coarse") throw ConfigError("expected zero or coarse, got '" + v + "'");
         c.initial_guess.coarse = v == "coarse";
       },
       [&c] { return std::string(c.initial_guess.coarse ? "coarse" : "zero"); }},
      integer("newton", "coarse_level", c.initial_guess.coarse_level),
      {"newton", "oracle_solver", [&c](const std::string& v) { c.newton.oracle_slab.mode = slab_solve_from_string(v); },
       [&c] { return to_string(c.newton.oracle_slab.mode); }},
      real("linsolve", "tol", c.linsolve.gmres.tol),
      integer("linsolve", "restart", c.linsolve.gmres.restart),
      integer("linsolve", "max_iter", c.linsolve.gmres.max_iter),
      boolean("linsolve", "precondition", c.linsolve.precondition),
      {"linsolve", "slab_solver", [&c](const std::string& v) { c.linsolve.slab.mode = slab_solve_from_string(v); },
       [&c] { return to_string(c.linsolve.slab.mode); }},
      real("linsolve", "inner_tol", c.linsolve.slab.inner_tol),
      integer("linsolve", "inner_max_iter", c.linsolve.slab.inner_max_iter),
      integer("linsolve", "jacobi_sweeps", c.linsolve.slab.jacobi_sweeps),
      {"linsolve", "direct_limit", [&c](const std::string& v) { c.linsolve.slab.direct_limit = parse_int(v); },
       [&c] { return std::to_string(c.linsolve.slab.direct_limit); }},
      boolean("adapt", "enabled", c.adapt.enabled),
      real("adapt", "theta_ref", c.adapt.theta_ref),
      real("adapt", "theta_deref", c.adapt.theta_deref),
      integer("adapt", "rounds", c.adapt.rounds),
      integer("adapt", "floor_p", c.adapt.floor_p),
      integer("adapt", "floor_q", c.adapt.floor_q),
      {"experiment", "problem", [&ex](const std::string& v) { ex.problem = v; }, [&ex] { return ex.problem; }},
      boolean("experiment", "linear", ex.linear),
      real("experiment", "psi_a", ex.manufactured.psi_a),
      real("experiment", "phi", ex.manufactured.phi),
      real("experiment", "k", ex.manufactured.k),
      real("experiment", "bump_a", ex.bump.a),
      real("experiment", "bump_af", ex.bump.a_f),
      real("experiment", "bump_ra", ex.bump.r_a),
      {"experiment", "levels",
       [&ex](const std::string& v) {
         ex.levels.clear();
         for (const auto& item : split(v, ',')) ex.levels.push_back(parse_int(item));
       },
       [&ex] {
         std::vector<std::string> items;
         for (int l : ex.levels) items.push_back(std::to_string(l));
         return join(items);
       }},
      {"experiment", "pairs",
       [&ex](const std::string& v) {
         ex.pairs.clear();
         for (const auto& item : split(v, ',')) {
           const auto pq = split(item, ':');
           if (pq.size() != 2) throw ConfigError("expected p:q, got '" + item + "'");
           ex.pairs.push_back({parse_int(pq[0]), parse_int(pq[1])});
         }
       },
       [&ex] {
         std::vector<std::string> items;
         for (const auto& d : ex.pairs) items.push_back(std::to_string(d.p) + ":" + std::to_string(d.q));
         return join(items);
       }},
      real("experiment", "probe_x", ex.probe_x),
      real("experiment", "probe_y", ex.probe_y),
      boolean("experiment", "compare_linear", ex.compare_linear),
      integer("experiment", "reference_level", ex.reference_level),
      integer("experiment", "reference_p", ex.reference.p),
      integer("experiment", "reference_q", ex.reference.q),
  };
  return e;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void RunConfig::validate() const {
  const bool linear = experiment.linear;
  try {
    model.validate(linear);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  require(forms.linear_mode == linear, "forms.linear_mode must mirror experiment.linear");

  require(mesh.n_r >= 1 && mesh.n_r <= 12, "mesh.n_r must lie in [1, 12]");
  require(mesh.ratio > 0.0 && std::isfinite(mesh.ratio), "mesh.ratio must be positive");
  for (const auto& side : mesh.neumann) {
    require(side == "left" || side == "right" || side == "bottom" || side == "top",
            "mesh.neumann: unknown side '" + side + "'");
  }
  require(mesh.neumann.size() < 4, "mesh.neumann: the Dirichlet boundary must not be empty");

  require(degrees.ceiling >= 1, "degrees.ceiling must be at least 1");
  require(degrees.p >= 0 && degrees.p <= degrees.ceiling, "degrees.p must lie in [0, degrees.ceiling]");
  require(degrees.q >= 0 && degrees.q <= degrees.ceiling, "degrees.q must lie in [0, degrees.ceiling]");

  require(newton.c_tol > 0.0, "newton.c_tol must be positive");
  require(newton.max_iter >= 1, "newton.max_iter must be at least 1");
  require(initial_guess.coarse_level >= 1, "newton.coarse_level must be at least 1");

  require(linsolve.gmres.tol > 0.0, "linsolve.tol must be positive");
  require(linsolve.gmres.restart >= 1, "linsolve.restart must be at least 1");
  require(linsolve.gmres.max_iter >= 1, "linsolve.max_iter must be at least 1");
  require(linsolve.slab.inner_tol > 0.0, "linsolve.inner_tol must be positive");
  require(linsolve.slab.inner_max_iter >= 1, "linsolve.inner_max_iter must be at least 1");
  require(linsolve.slab.jacobi_sweeps >= 1, "linsolve.jacobi_sweeps must be at least 1");
  require(linsolve.slab.direct_limit >= 0, "linsolve.direct_limit must be non-negative");

  require(adapt.rounds >= 0, "adapt.rounds must be non-negative");
  require(adapt.theta_deref > 0.0 && adapt.theta_deref < adapt.theta_ref && adapt.theta_ref < 1.0,
          "adapt.theta_ref and adapt.theta_deref must satisfy 0 < theta_deref < theta_ref < 1");
  require(adapt.floor_p <= degrees.ceiling, "adapt.floor_p must not exceed degrees.ceiling");
  require(adapt.floor_q <= degrees.ceiling, "adapt.floor_q must not exceed degrees.ceiling");

  require(experiment.problem == "manufactured" || experiment.problem == "bump",
          "experiment.problem must be manufactured or bump");
  require(!experiment.levels.empty(), "experiment.levels must not be empty");
  for (std::size_t i = 0; i < experiment.levels.size(); ++i) {
    require(experiment.levels[i] >= 1 && experiment.levels[i] <= 12, "experiment.levels entries must lie in [1, 12]");
    require(i == 0 || experiment.levels[i] > experiment.levels[i - 1], "experiment.levels must be strictly increasing");
  }
  require(!experiment.pairs.empty(), "experiment.pairs must not be empty");
  for (const auto& d : experiment.pairs) {
    require(d.p >= 0 && d.q >= 0 && d.p <= degrees.ceiling && d.q <= degrees.ceiling,
            "experiment.pairs entries must lie in [0, degrees.ceiling]");
  }
  require(experiment.reference_level == 0 || experiment.reference_level > experiment.levels.back(),
          "experiment.reference_level must be 0 or finer than every level");
  require(experiment.reference.p >= 0 && experiment.reference.p <= degrees.ceiling && experiment.reference.q >= 0 &&
              experiment.reference.q <= degrees.ceiling,
          "experiment.reference_p and reference_q must lie in [0, degrees.ceiling]");
  const bool bump = experiment.problem == "bump";
  const double lo = bump ? -0.5 : 0.0, hi = bump ? 0.5 : 1.0;
  require(experiment.probe_x > lo && experiment.probe_x < hi && experiment.probe_y > lo && experiment.probe_y < hi,
          "experiment.probe_x and probe_y must lie inside the domain");
  require(experiment.manufactured.psi_a > 0.0, "experiment.psi_a must be positive");
  require(experiment.bump.r_a > 0.0, "experiment.bump_ra must be positive");
}

AdaptConfig RunConfig::adapt_config(CellDegree start) const {
  AdaptConfig a;
  a.theta_ref = adapt.theta_ref;
  a.theta_deref = adapt.theta_deref;
  a.max_rounds = adapt.rounds;
  a.floor = {adapt.floor_p >= 0 ? adapt.floor_p : start.p, adapt.floor_q >= 0 ? adapt.floor_q : start.q};
  a.ceiling = degrees.ceiling;
  return a;
}

RunConfig parse_config(const std::string& text, bool force_linear) {
  RunConfig cfg;
  auto table = entries(cfg);
  std::map<std::string, Entry*> index;
  std::map<std::string, bool> sections;
  for (auto& e : table) {
    index[e.section + "." + e.key] = &e;
    sections[e.section] = true;
  }

  std::istringstream in(text);
  std::string line, section;
  std::map<std::string, int> seen;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(number) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string name = section + "." + key;
    const auto it = index.find(name);
    if (it == index.end()) throw ConfigError(where + "unknown key " + name);
    if (seen.count(name)) throw ConfigError(where + "duplicate key " + name);
    seen[name] = number;
    try {
      it->second->set(trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw ConfigError(where + name + ": " + e.what());
    }
  }
  if (force_linear) cfg.experiment.linear = true;
  cfg.forms.linear_mode = cfg.experiment.linear;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path, bool force_linear) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), force_linear);
}

std::string serialize_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out, section;
  for (const auto& e : entries(copy)) {
    if (e.section != section) {
      if (!section.empty()) out += "\n";
      section = e.section;
      out += "[" + section + "]\n";
    }
    const std::string value = e.get();
    out += e.key + (value.empty() ? " =" : " = " + value) + "\n";
  }
  return out;
}

}  // namespace stdg
