#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapephase/archive.hpp"
#include "shapephase/connection.hpp"
#include "shapephase/dynamics.hpp"
#include "shapephase/error.hpp"
#include "shapephase/numeric.hpp"
#include "shapephase/reconstruction.hpp"
#include "shapephase/report.hpp"
#include "shapephase/scenario.hpp"
#include "shapephase/triangle.hpp"
#include "shapephase/validate.hpp"

namespace sp = shapephase;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

sp::Vec3 initial_normal(const sp::Scenario& sc) {
  if (sc.normal) return *sc.normal;
  const auto np = sp::principal_normal(sc.state.config, sc.masses);
  if (!np) {
    sp::raise(sp::ErrorCode::PreconditionViolated,
              "initial configuration is collinear; supply an explicit 'normal'");
  }
  return *np;
}

sp::OrientedTrajectory run_scenario(const sp::Scenario& sc) {
  sp::Trajectory tr =
      sp::integrate(sc.state, sc.duration, sc.masses, sc.potential, sc.integrator);
  return sp::orientation_lift(tr, initial_normal(sc));
}

sp::ArchiveMeta meta_for(const sp::Scenario& sc) {
  sp::ArchiveMeta meta;
  meta.scenario_hash = sp::scenario_hash(sc);
  meta.masses = sc.masses;
  meta.potential = sc.potential;
  meta.return_tolerance = sc.return_tolerance;
  meta.phase_tolerance = sc.phase_tolerance;
  return meta;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) sp::raise(sp::ErrorCode::IoError, "cannot open output file '" + path + "'");
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

int cmd_simulate(const std::string& scenario_path, const std::string& archive_path,
                 const std::string& report_path, bool json_stdout) {
  Stopwatch watch;
  const sp::Scenario sc = sp::load_scenario(scenario_path);
  if (sc.duration == 0.0) {
    sp::ArchiveMeta meta = meta_for(sc);
    meta.J0 = sp::angular_momentum(sc.state, sc.masses);
    meta.normal0 = initial_normal(sc);
    auto out = open_out(archive_path);
    sp::write_archive_header(out, meta);
    nlohmann::json j;
    j["version"] = sp::kToolVersion;
    j["kind"] = "simulate";
    j["scenario_hash"] = meta.scenario_hash;
    j["pass"] = true;
    j["span"] = {{"t0", 0.0}, {"t1", 0.0}, {"samples", 0}, {"sample_spacing", 0.0}};
    j["timing"] = nlohmann::json::object();
    if (!report_path.empty()) write_json(report_path, j);
    if (json_stdout) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "zero-duration run: wrote header-only archive " << archive_path
                << "\n";
    }
    return 0;
  }

  const sp::OrientedTrajectory otr = run_scenario(sc);
  sp::ArchiveMeta meta = meta_for(sc);
  meta.J0 = otr.trajectory().samples().front().J;
  meta.normal0 = otr.normals().front();
  sp::write_archive_file(archive_path, otr, meta);

  const nlohmann::json report =
      sp::simulate_report_json(otr.trajectory(), meta.scenario_hash, watch.seconds());
  if (!report_path.empty()) write_json(report_path, report);
  if (json_stdout) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << sp::run_report_text(report);
  }
  return otr.trajectory().within_drift_budgets() ? 0 : 1;
}

int cmd_reconstruct(const std::string& scenario_path, const std::string& archive_path,
                    const std::string& report_path, bool json_stdout) {
  Stopwatch watch;
  double return_tol = 1e-6;
  double phase_tol = 1e-5;
  std::string hash;

  // Either run the scenario or rebuild the trajectory from an archive;
  // both paths feed the identical downstream pipeline.
  std::unique_ptr<sp::OrientedTrajectory> otr;
  if (!scenario_path.empty()) {
    const sp::Scenario sc = sp::load_scenario(scenario_path);
    return_tol = sc.return_tolerance;
    phase_tol = sc.phase_tolerance;
    hash = sp::scenario_hash(sc);
    otr = std::make_unique<sp::OrientedTrajectory>(run_scenario(sc));
  } else {
    const sp::Archive ar = sp::read_archive_file(archive_path);
    return_tol = ar.meta.return_tolerance;
    phase_tol = ar.meta.phase_tolerance;
    hash = ar.meta.scenario_hash;
    otr = std::make_unique<sp::OrientedTrajectory>(sp::archive_trajectory(ar));
  }

  const sp::Vec3 J0 = otr->trajectory().samples().front().J;
  const auto returns = sp::shape_returns(*otr, return_tol);
  if (returns.empty()) {
    sp::raise(sp::ErrorCode::NoReturn,
              "no shape return within tolerance over the simulated span");
  }
  const auto best = std::min_element(
      returns.begin(), returns.end(), [](const sp::ShapeReturn& a, const sp::ShapeReturn& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.t < b.t;
      });

  sp::ReconstructOptions opt;
  opt.tolerance = phase_tol;
  opt.shape_closure_tol = 10.0 * return_tol;
  const sp::PhaseReport pr = sp::reconstruct(*otr, best->t, J0, opt);

  const nlohmann::json report =
      sp::run_report_json(pr, otr->trajectory(), returns, hash, watch.seconds());
  if (!report_path.empty()) write_json(report_path, report);
  if (json_stdout) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << sp::run_report_text(report);
  }
  return pr.pass ? 0 : 1;
}

std::vector<std::pair<double, double>> parse_polygon(const std::string& text) {
  std::vector<std::pair<double, double>> verts;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      sp::raise(sp::ErrorCode::ConfigError,
                "polygon: expected comma-separated 'z1:theta1' pairs");
    }
    try {
      verts.emplace_back(std::stod(item.substr(0, colon)),
                         std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      sp::raise(sp::ErrorCode::ConfigError, "polygon: malformed number in '" + item + "'");
    }
  }
  if (verts.size() < 2) {
    sp::raise(sp::ErrorCode::ConfigError, "polygon: need at least two vertices");
  }
  return verts;
}

std::vector<std::pair<double, double>> read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) sp::raise(sp::ErrorCode::IoError, "cannot open curve file '" + path + "'");
  std::vector<std::pair<double, double>> verts;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream is(line);
    std::vector<double> cols;
    double x;
    while (is >> x) cols.push_back(x);
    if (cols.empty()) continue;
    if (cols.size() == 2) {
      verts.emplace_back(cols[0], cols[1]);
    } else if (cols.size() == 3) {
      verts.emplace_back(cols[1], cols[2]);  // rows of t z1 theta1
    } else {
      sp::raise(sp::ErrorCode::ConfigError,
                "curve file: rows must be 'z1 theta1' or 't z1 theta1'");
    }
  }
  if (verts.size() < 2) {
    sp::raise(sp::ErrorCode::ConfigError, "curve file: need at least two points");
  }
  return verts;
}

int cmd_holonomy(bool have_latitude, double latitude, double turns,
                 const std::string& polygon, const std::string& curve_file,
                 const std::vector<double>& mass_list) {
  sp::Masses m;
  if (!mass_list.empty()) {
    if (mass_list.size() != 3) {
      sp::raise(sp::ErrorCode::ConfigError, "--masses: expected three values");
    }
    m = sp::Masses{mass_list[0], mass_list[1], mass_list[2]};
    if (!m.valid()) sp::raise(sp::ErrorCode::ConfigError, "--masses: must be positive");
  }

  sp::ShapeCurve curve = sp::ShapeCurve::latitude(0.0);
  if (have_latitude) {
    curve = sp::ShapeCurve::latitude(latitude, turns);
  } else if (!polygon.empty()) {
    curve = sp::ShapeCurve::polygon(parse_polygon(polygon));
  } else if (!curve_file.empty()) {
    auto verts = read_curve_file(curve_file);
    const bool already_closed = std::abs(verts.front().first - verts.back().first) < 1e-9 &&
                                std::abs(std::remainder(verts.front().second - verts.back().second,
                                                        2.0 * sp::kPi)) < 1e-9;
    if (already_closed) verts.pop_back();
    curve = sp::ShapeCurve::polygon(std::move(verts), /*close=*/true);
  } else {
    sp::raise(sp::ErrorCode::ConfigError,
              "holonomy: supply one of --latitude, --polygon, --curve");
  }

  const auto [z1_start, theta1_start] = curve.at(0.0);
  const sp::Configuration q0 = sp::section_configuration(z1_start, theta1_start, m);
  const sp::HolonomyResult res = sp::holonomy_check(curve, q0, m);

  std::cout << "holonomy check\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "  lift rotation      % .12f rad\n", res.lift_angle);
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "  gauge prediction   % .12f rad (mod 2 pi: % .12f)\n",
                res.predicted_angle, sp::wrap_pi(res.predicted_angle));
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "  residual           % .3e rad\n", res.residual);
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "  lift momentum max  % .3e\n", res.max_abs_momentum);
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "  lift shape error   % .3e\n", res.max_shape_error);
  std::cout << buf;
  const bool ok = std::abs(res.residual) <= 1e-6;
  std::cout << "  result             " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

int cmd_validate(std::uint64_t seed, int count, bool flip_beta) {
  if (flip_beta) sp::debug::flip_beta_sign = true;
  const auto results = sp::run_validation_suite(seed, count);
  std::cout << "self-check suite (seed " << seed << ", count " << count << ")\n";
  std::cout << sp::render_property_table(results);
  return sp::all_passed(results) ? 0 : 1;
}

int cmd_plotdata(const std::string& archive_path, const std::string& prefix) {
  const sp::Archive ar = sp::read_archive_file(archive_path);
  if (ar.samples.empty()) {
    sp::raise(sp::ErrorCode::PreconditionViolated, "archive holds no samples to plot");
  }
  const auto fmtrow = [](std::ofstream& out, std::initializer_list<double> vals) {
    bool first = true;
    char buf[32];
    for (double v : vals) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << (first ? "" : " ") << buf;
      first = false;
    }
    out << "\n";
  };

  {
    auto out = open_out(prefix + "_shape.txt");
    out << "# t z1 theta1 w1 w2 w3\n";
    for (std::size_t k = 0; k < ar.samples.size(); ++k) {
      fmtrow(out, {ar.samples[k].t, ar.z1[k], ar.theta1[k], ar.w[k].x(), ar.w[k].y(),
                   ar.w[k].z()});
    }
  }
  {
    auto out = open_out(prefix + "_fiber.txt");
    out << "# t z2 theta2\n";
    if (ar.meta.momentum_degenerate) {
      out << "# momentum degenerate: fiber coordinates are conventions (z2 = 0)\n";
    } else if (!ar.meta.fiber_angle_valid) {
      out << "# eigenframe degenerate along the run: theta2 written as 0\n";
    }
    for (std::size_t k = 0; k < ar.samples.size(); ++k) {
      fmtrow(out, {ar.samples[k].t, ar.z2[k], ar.theta2[k]});
    }
  }
  {
    // Meridian arcs closing the reduced curve: fiber pole down to the curve's
    // endpoints at constant shape and theta2.
    auto out = open_out(prefix + "_arcs.txt");
    out << "# arc s z2 theta2\n";
    const int narc = 65;
    for (int arc = 0; arc < 2; ++arc) {
      const double z2_end = arc == 0 ? ar.z2.front() : ar.z2.back();
      const double th2 = arc == 0 ? ar.theta2.front() : ar.theta2.back();
      for (int i = 0; i < narc; ++i) {
        const double s = static_cast<double>(i) / (narc - 1);
        fmtrow(out, {static_cast<double>(arc), s, 1.0 + s * (z2_end - 1.0), th2});
      }
    }
  }
  {
    auto out = open_out(prefix + "_phase.txt");
    out << "# t dynamic_cumulative geometric_cumulative\n";
    const sp::OrientedTrajectory otr = sp::archive_trajectory(ar);
    const auto& samples = otr.trajectory().samples();
    const sp::Vec3 J0vec = ar.meta.J0;
    const double J0 = J0vec.norm();
    const bool fiber_ok = !ar.meta.momentum_degenerate && ar.meta.fiber_angle_valid;
    if (!fiber_ok) out << "# fiber angle unavailable: geometric column written as 0\n";
    std::vector<double> alpha(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
      alpha[k] = sp::alpha_J0(samples[k].state, otr.masses(), J0vec);
    }
    double dyn = 0.0, geo = 0.0;
    fmtrow(out, {samples[0].t, 0.0, 0.0});
    for (std::size_t k = 1; k < samples.size(); ++k) {
      const double h = samples[k].t - samples[k - 1].t;
      dyn += 0.5 * h * (alpha[k] + alpha[k - 1]);
      if (fiber_ok) {
        const double x0 = ar.z1[k - 1] * ar.z2[k - 1], x1 = ar.z1[k] * ar.z2[k];
        geo += J0 * (0.25 * (x0 + x1) * (ar.theta1[k] - ar.theta1[k - 1]) +
                     (0.5 * (ar.z2[k - 1] + ar.z2[k]) - 1.0) *
                         (ar.theta2[k] - ar.theta2[k - 1]));
      }
      fmtrow(out, {samples[k].t, dyn, geo});
    }
  }
  std::cout << "wrote " << prefix << "_{shape,fiber,arcs,phase}.txt\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-body shape-sphere phase toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate a scenario and archive it");
  std::string sim_scenario, sim_archive, sim_report;
  bool sim_json = false;
  sim->add_option("--scenario", sim_scenario, "scenario file")->required();
  sim->add_option("--archive", sim_archive, "output archive path")->required();
  sim->add_option("--report", sim_report, "write the JSON report to this file");
  sim->add_flag("--json", sim_json, "print the JSON report to stdout");

  // reconstruct
  auto* rec = app.add_subcommand(
      "reconstruct", "detect a shape return and balance rotation against phases");
  std::string rec_scenario, rec_archive, rec_report;
  bool rec_json = false;
  auto* rs = rec->add_option("--scenario", rec_scenario, "scenario file");
  auto* ra = rec->add_option("--archive", rec_archive, "archive file");
  rs->excludes(ra);
  rec->add_option("--report", rec_report, "write the JSON report to this file");
  rec->add_flag("--json", rec_json, "print the JSON report to stdout");

  // holonomy
  auto* hol = app.add_subcommand("holonomy",
                                 "compare lift holonomy with the gauge prediction");
  double hol_latitude = 0.0, hol_turns = 1.0;
  std::string hol_polygon, hol_curve;
  std::vector<double> hol_masses;
  auto* hl = hol->add_option("--latitude", hol_latitude, "constant-z1 circle");
  hol->add_option("--turns", hol_turns, "latitude turns (may be negative)");
  hol->add_option("--polygon", hol_polygon, "comma-separated z1:theta1 vertices");
  hol->add_option("--curve", hol_curve, "file of chart points (closed)");
  hol->add_option("--masses", hol_masses, "three masses (default 1 1 1)")->expected(3);

  // validate
  auto* val = app.add_subcommand("validate", "run the randomized self-check suite");
  std::uint64_t val_seed = 2026;
  int val_count = 25;
  bool val_flip = false;
  val->add_option("--seed", val_seed, "random seed");
  val->add_option("--count", val_count, "trials per property (0: empty table)");
  val->add_flag("--debug-flip-beta", val_flip)->group("");  // fault-injection canary

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "dump plot-ready series from an archive");
  std::string plot_archive, plot_prefix;
  plot->add_option("--archive", plot_archive, "archive file")->required();
  plot->add_option("--out-prefix", plot_prefix, "output file prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    return 3;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_archive, sim_report, sim_json);
    if (rec->parsed()) {
      if (rec_scenario.empty() == rec_archive.empty()) {
        sp::raise(sp::ErrorCode::ConfigError,
                  "reconstruct: supply exactly one of --scenario or --archive");
      }
      return cmd_reconstruct(rec_scenario, rec_archive, rec_report, rec_json);
    }
    if (hol->parsed()) {
      return cmd_holonomy(hl->count() > 0, hol_latitude, hol_turns, hol_polygon,
                          hol_curve, hol_masses);
    }
    if (val->parsed()) return cmd_validate(val_seed, val_count, val_flip);
    if (plot->parsed()) return cmd_plotdata(plot_archive, plot_prefix);
  } catch (const sp::Error& err) {
    std::cerr << sp::error_code_name(err.code()) << ": " << err.what() << "\n";
    return sp::exit_code_for(err.code());
  }
  return 0;
}
