#include "shapephase/report.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace shapephase {

namespace {

nlohmann::json vec3_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

nlohmann::json timing_json(double elapsed_seconds) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  return {{"generated_unix_ms", ms}, {"elapsed_seconds", elapsed_seconds}};
}

nlohmann::json conservation_json(const Trajectory& tr) {
  const auto& s0 = tr.samples().front();
  return {{"energy_initial", s0.E},
          {"momentum_initial", vec3_json(s0.J)},
          {"max_energy_drift", tr.max_energy_drift()},
          {"max_momentum_drift", tr.max_momentum_drift()},
          {"energy_budget", tr.config().energy_drift_budget},
          {"momentum_budget", tr.config().momentum_drift_budget},
          {"within_budget", tr.within_drift_budgets()}};
}

nlohmann::json span_json(const Trajectory& tr) {
  return {{"t0", tr.t0()},
          {"t1", tr.t1()},
          {"samples", tr.samples().size()},
          {"sample_spacing", tr.sample_spacing()}};
}

}  // namespace

nlohmann::json phase_report_json(const PhaseReport& pr) {
  nlohmann::json j;
  j["dtheta"] = pr.dtheta;
  j["dynamic_phase"] = pr.dynamic_phase;
  j["dynamic_error"] = pr.dynamic_error;
  j["geometric_phase"] = pr.geometric_phase;
  j["geometric_error"] = pr.geometric_error;
  j["residual"] = pr.residual;
  j["residual_error"] = pr.residual_error;
  j["pass"] = pr.pass;
  j["tolerance"] = pr.tolerance;
  j["J0"] = vec3_json(pr.J0);
  j["J0_magnitude"] = pr.J0.norm();
  j["t_return"] = pr.t_return;
  j["return_distance"] = pr.return_distance;
  j["raw_line_integral"] = pr.raw_line_integral;
  j["winding_correction"] = pr.winding_correction;
  j["winding"] = pr.winding;
  j["theta1_term"] = pr.theta1_term;
  j["theta2_term"] = pr.theta2_term;
  j["z2_start"] = pr.z2_start;
  j["z2_end"] = pr.z2_end;
  j["arc_length_start"] = pr.arc_length_start;
  j["arc_length_end"] = pr.arc_length_end;
  j["point_loop"] = pr.point_loop;
  j["min_eigen_gap_ratio"] = pr.min_eigen_gap_ratio;
  j["min_frame_continuity"] = pr.min_frame_continuity;
  j["warnings"] = pr.warnings;
  return j;
}

nlohmann::json run_report_json(const PhaseReport& pr, const Trajectory& tr,
                               const std::vector<ShapeReturn>& returns,
                               const std::string& scenario_hash,
                               double elapsed_seconds) {
  nlohmann::json j;
  j["version"] = kToolVersion;
  j["kind"] = "reconstruct";
  j["scenario_hash"] = scenario_hash;
  j["pass"] = pr.pass;
  j["phase"] = phase_report_json(pr);
  j["conservation"] = conservation_json(tr);
  j["span"] = span_json(tr);
  nlohmann::json rr = nlohmann::json::array();
  for (const auto& r : returns) rr.push_back({{"t", r.t}, {"distance", r.distance}});
  j["returns"] = rr;
  j["timing"] = timing_json(elapsed_seconds);
  return j;
}

nlohmann::json simulate_report_json(const Trajectory& tr,
                                    const std::string& scenario_hash,
                                    double elapsed_seconds) {
  nlohmann::json j;
  j["version"] = kToolVersion;
  j["kind"] = "simulate";
  j["scenario_hash"] = scenario_hash;
  j["pass"] = tr.within_drift_budgets();
  j["conservation"] = conservation_json(tr);
  j["span"] = span_json(tr);
  j["timing"] = timing_json(elapsed_seconds);
  return j;
}

nlohmann::json strip_timing(nlohmann::json r) {
  r.erase("timing");
  return r;
}

std::string run_report_text(const nlohmann::json& r) {
  std::ostringstream out;
  const auto& c = r.at("conservation");
  const auto& s = r.at("span");
  out << "run " << r.at("kind").get<std::string>() << " (scenario "
      << r.at("scenario_hash").get<std::string>() << ")\n";
  out << "  time span          [" << fmt("%.9g", s.at("t0").get<double>()) << ", "
      << fmt("%.9g", s.at("t1").get<double>()) << "], "
      << s.at("samples").get<std::size_t>() << " samples\n";
  out << "  energy drift       " << fmt("%.3e", c.at("max_energy_drift").get<double>())
      << " (budget " << fmt("%.1e", c.at("energy_budget").get<double>()) << ")\n";
  out << "  momentum drift     "
      << fmt("%.3e", c.at("max_momentum_drift").get<double>()) << " (budget "
      << fmt("%.1e", c.at("momentum_budget").get<double>()) << ")\n";
  if (r.contains("phase")) {
    const auto& p = r.at("phase");
    out << "  return time        " << fmt("%.12g", p.at("t_return").get<double>())
        << "\n";
    out << "  return distance    "
        << fmt("%.3e", p.at("return_distance").get<double>()) << "\n";
    out << "  measured rotation  " << fmt("%.12g", p.at("dtheta").get<double>())
        << " rad about J0 (|J0| = " << fmt("%.9g", p.at("J0_magnitude").get<double>())
        << ")\n";
    out << "  dynamic phase      " << fmt("%.12g", p.at("dynamic_phase").get<double>())
        << " (err " << fmt("%.1e", p.at("dynamic_error").get<double>()) << ")\n";
    out << "  geometric phase    "
        << fmt("%.12g", p.at("geometric_phase").get<double>()) << " (err "
        << fmt("%.1e", p.at("geometric_error").get<double>()) << ")\n";
    if (p.at("point_loop").get<bool>()) {
      out << "    point loop       yes (geometric phase defined to vanish)\n";
    } else {
      out << "    theta1 term      " << fmt("%.12g", p.at("theta1_term").get<double>())
          << "\n";
      out << "    theta2 term      " << fmt("%.12g", p.at("theta2_term").get<double>())
          << "\n";
      out << "    winding          " << p.at("winding").get<int>() << " (correction "
          << fmt("%.12g", p.at("winding_correction").get<double>()) << ")\n";
      out << "    closing arcs     "
          << fmt("%.6g", p.at("arc_length_start").get<double>()) << " + "
          << fmt("%.6g", p.at("arc_length_end").get<double>()) << "\n";
    }
    out << "  residual           " << fmt("%.3e", p.at("residual").get<double>())
        << " rad (est err " << fmt("%.1e", p.at("residual_error").get<double>())
        << ")\n";
    for (const auto& w : p.at("warnings")) {
      out << "  warning            " << w.get<std::string>() << "\n";
    }
    out << "  result             " << (p.at("pass").get<bool>() ? "PASS" : "FAIL")
        << " (tolerance " << fmt("%.1e", p.at("tolerance").get<double>()) << ")\n";
  } else {
    out << "  result             " << (r.at("pass").get<bool>() ? "PASS" : "FAIL")
        << "\n";
  }
  return out.str();
}

}  // namespace shapephase
