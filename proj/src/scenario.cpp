#include "shapephase/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "shapephase/error.hpp"
#include "shapephase/numeric.hpp"
#include "shapephase/triangle.hpp"

namespace shapephase {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(const Vec3& v) {
  return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z());
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& key, const std::string& tok) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    raise(ErrorCode::ConfigError, "field '" + key + "': malformed number '" + tok + "'");
  }
  if (pos != tok.size()) {
    raise(ErrorCode::ConfigError, "field '" + key + "': malformed number '" + tok + "'");
  }
  return v;
}

Vec3 parse_vec3(const std::string& key, const std::vector<std::string>& toks) {
  if (toks.size() != 3) {
    raise(ErrorCode::ConfigError, "field '" + key + "': expected 3 numbers");
  }
  return Vec3(parse_double(key, toks[0]), parse_double(key, toks[1]),
              parse_double(key, toks[2]));
}

}  // namespace

std::string Scenario::method_name() const {
  return integrator.method == IntegratorConfig::Method::Verlet ? "verlet" : "adaptive";
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::map<std::string, bool> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;

  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::ConfigError,
            "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const auto toks = tokens(trim(line.substr(eq + 1)));
    if (toks.empty()) {
      raise(ErrorCode::ConfigError, "field '" + key + "': missing value");
    }
    if (seen[key]) {
      raise(ErrorCode::ConfigError, "field '" + key + "': duplicated");
    }
    seen[key] = true;

    auto one = [&]() {
      if (toks.size() != 1) {
        raise(ErrorCode::ConfigError, "field '" + key + "': expected a single value");
      }
      return toks[0];
    };

    if (key == "masses") {
      if (toks.size() != 3) raise(ErrorCode::ConfigError, "field 'masses': expected 3 numbers");
      s.masses.m1 = parse_double(key, toks[0]);
      s.masses.m2 = parse_double(key, toks[1]);
      s.masses.m3 = parse_double(key, toks[2]);
    } else if (key == "q1") {
      s.state.config.q1 = parse_vec3(key, toks);
    } else if (key == "q2") {
      s.state.config.q2 = parse_vec3(key, toks);
    } else if (key == "q3") {
      s.state.config.q3 = parse_vec3(key, toks);
    } else if (key == "v1") {
      s.state.v1 = parse_vec3(key, toks);
    } else if (key == "v2") {
      s.state.v2 = parse_vec3(key, toks);
    } else if (key == "v3") {
      s.state.v3 = parse_vec3(key, toks);
    } else if (key == "normal") {
      s.normal = parse_vec3(key, toks);
    } else if (key == "potential") {
      if (toks[0] == "newtonian") {
        if (toks.size() != 1) {
          raise(ErrorCode::ConfigError, "field 'potential': newtonian takes no argument");
        }
        s.potential.kind = PotentialSpec::Kind::Newtonian;
        s.potential.exponent = -1.0;
      } else if (toks[0] == "powerlaw") {
        if (toks.size() != 2) {
          raise(ErrorCode::ConfigError, "field 'potential': powerlaw needs an exponent");
        }
        s.potential.kind = PotentialSpec::Kind::PowerLaw;
        s.potential.exponent = parse_double(key, toks[1]);
      } else {
        raise(ErrorCode::ConfigError,
              "field 'potential': unknown kind '" + toks[0] + "'");
      }
    } else if (key == "softening") {
      s.potential.softening = parse_double(key, one());
      if (s.potential.softening < 0.0) {
        raise(ErrorCode::ConfigError, "field 'softening': must be >= 0");
      }
    } else if (key == "method") {
      const std::string v = one();
      if (v == "adaptive") {
        s.integrator.method = IntegratorConfig::Method::AdaptiveRK;
      } else if (v == "verlet") {
        s.integrator.method = IntegratorConfig::Method::Verlet;
      } else {
        raise(ErrorCode::ConfigError, "field 'method': unknown method '" + v + "'");
      }
    } else if (key == "rel_tol") {
      s.integrator.rel_tol = parse_double(key, one());
    } else if (key == "abs_tol") {
      s.integrator.abs_tol = parse_double(key, one());
    } else if (key == "max_step") {
      s.integrator.max_step = parse_double(key, one());
    } else if (key == "fixed_step") {
      s.integrator.fixed_step = parse_double(key, one());
    } else if (key == "sample_spacing") {
      s.integrator.sample_spacing = parse_double(key, one());
    } else if (key == "duration") {
      s.duration = parse_double(key, one());
    } else if (key == "return_tolerance") {
      s.return_tolerance = parse_double(key, one());
    } else if (key == "phase_tolerance") {
      s.phase_tolerance = parse_double(key, one());
    } else if (key == "seed") {
      const std::string v = one();
      try {
        s.seed = std::stoull(v);
      } catch (const std::exception&) {
        raise(ErrorCode::ConfigError, "field 'seed': malformed integer '" + v + "'");
      }
    } else {
      raise(ErrorCode::ConfigError, "unknown field '" + key + "'");
    }
  }

  for (const char* req : {"masses", "q1", "q2", "q3", "v1", "v2", "v3", "duration"}) {
    if (!seen[req]) {
      raise(ErrorCode::ConfigError, std::string("missing required field '") + req + "'");
    }
  }
  if (!s.masses.valid()) {
    raise(ErrorCode::ConfigError, "field 'masses': all masses must be positive");
  }
  if (s.duration < 0.0) {
    raise(ErrorCode::ConfigError, "field 'duration': must be >= 0");
  }
  for (const auto& [key, val] :
       std::initializer_list<std::pair<const char*, double>>{
           {"rel_tol", s.integrator.rel_tol},
           {"abs_tol", s.integrator.abs_tol},
           {"max_step", s.integrator.max_step},
           {"fixed_step", s.integrator.fixed_step},
           {"sample_spacing", s.integrator.sample_spacing},
           {"return_tolerance", s.return_tolerance},
           {"phase_tolerance", s.phase_tolerance}}) {
    if (!(val > 0.0)) {
      raise(ErrorCode::ConfigError, std::string("field '") + key + "': must be > 0");
    }
  }
  if (s.normal) {
    if (s.normal->norm() < 1e-12) {
      raise(ErrorCode::ConfigError, "field 'normal': zero vector");
    }
    s.normal = s.normal->normalized();
  }

  // Center-of-mass frame: small residuals are re-centered exactly, anything
  // larger is a configuration mistake worth flagging.
  const double M = s.masses.total();
  double scale = 1.0;
  for (int a = 0; a < 3; ++a) scale = std::max(scale, s.state.config[a].norm());
  const Vec3 qcom = (s.masses.m1 * s.state.config.q1 + s.masses.m2 * s.state.config.q2 +
                     s.masses.m3 * s.state.config.q3) /
                    M;
  const Vec3 vcom =
      (s.masses.m1 * s.state.v1 + s.masses.m2 * s.state.v2 + s.masses.m3 * s.state.v3) / M;
  if (qcom.norm() > 1e-6 * scale) {
    raise(ErrorCode::ConfigError, "positions: center of mass is not at the origin");
  }
  double vscale = 1.0;
  for (const Vec3* v : {&s.state.v1, &s.state.v2, &s.state.v3}) {
    vscale = std::max(vscale, v->norm());
  }
  if (vcom.norm() > 1e-6 * vscale) {
    raise(ErrorCode::ConfigError, "velocities: center of mass momentum is not zero");
  }
  for (int a = 0; a < 3; ++a) s.state.config[a] -= qcom;
  s.state.v1 -= vcom;
  s.state.v2 -= vcom;
  s.state.v3 -= vcom;
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "# three-body scenario (natural units, G = 1)\n";
  out << "masses = " << fmt(s.masses.m1) << " " << fmt(s.masses.m2) << " "
      << fmt(s.masses.m3) << "\n";
  out << "q1 = " << fmt(s.state.config.q1) << "\n";
  out << "q2 = " << fmt(s.state.config.q2) << "\n";
  out << "q3 = " << fmt(s.state.config.q3) << "\n";
  out << "v1 = " << fmt(s.state.v1) << "\n";
  out << "v2 = " << fmt(s.state.v2) << "\n";
  out << "v3 = " << fmt(s.state.v3) << "\n";
  if (s.potential.kind == PotentialSpec::Kind::Newtonian) {
    out << "potential = newtonian\n";
  } else {
    out << "potential = powerlaw " << fmt(s.potential.exponent) << "\n";
  }
  out << "softening = " << fmt(s.potential.softening) << "\n";
  out << "method = " << s.method_name() << "\n";
  out << "rel_tol = " << fmt(s.integrator.rel_tol) << "\n";
  out << "abs_tol = " << fmt(s.integrator.abs_tol) << "\n";
  out << "max_step = " << fmt(s.integrator.max_step) << "\n";
  out << "fixed_step = " << fmt(s.integrator.fixed_step) << "\n";
  out << "sample_spacing = " << fmt(s.integrator.sample_spacing) << "\n";
  out << "duration = " << fmt(s.duration) << "\n";
  out << "return_tolerance = " << fmt(s.return_tolerance) << "\n";
  out << "phase_tolerance = " << fmt(s.phase_tolerance) << "\n";
  out << "seed = " << s.seed << "\n";
  if (s.normal) out << "normal = " << fmt(*s.normal) << "\n";
  return out.str();
}

std::string scenario_hash(const Scenario& s) {
  const std::uint64_t h = fnv1a64(serialize_scenario(s));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shapephase
