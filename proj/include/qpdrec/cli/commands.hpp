#ifndef QPDREC_CLI_COMMANDS_HPP
#define QPDREC_CLI_COMMANDS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpdrec/analytic_solution.hpp"
#include "qpdrec/cli/config.hpp"
#include "qpdrec/jacobi.hpp"
#include "qpdrec/lindblad_oracle.hpp"
#include "qpdrec/protocol.hpp"
#include "qpdrec/quasiprobability.hpp"

namespace qpdrec::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInapplicable = 2 };

/// 17 significant digits; parses back to the identical double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes LF-terminated text in binary mode so line endings never change.
inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// figure1
// ---------------------------------------------------------------------------

/// Figure curves eps + e^{-2 gamma t}(sin chi t - eps cos chi t) for
/// (gamma, eps) = (0.05, 0.05) and (0.1, 0.1), chi t in [0, 4 pi] step 0.01.
inline std::string figure1_csv() {
  ModelParams slow;
  slow.chi = 1.0;
  slow.field_decay = 0.05;
  ModelParams fast = slow;
  fast.field_decay = 0.1;

  std::string out = "chi_t,g_gamma005,g_gamma01\n";
  const auto count = static_cast<long>(std::floor(4.0 * kPi / 0.01 + 1e-9));
  for (long i = 0; i <= count; ++i) {
    const double x = 0.01 * static_cast<double>(i);
    out += format_double(x) + "," +
           format_double(crossing_function(slow, x / slow.chi, CrossingVariant::figure_literal)) + "," +
           format_double(crossing_function(fast, x / fast.chi, CrossingVariant::figure_literal)) + "\n";
  }
  return out;
}

inline int cmd_figure1(const ScenarioConfig& cfg, std::ostream& out) {
  const std::string path = cfg.output_or("figure1.csv");
  write_text_file(path, figure1_csv());
  out << "wrote " << path << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json schedule_json(const ScenarioConfig& cfg, const MeasurementSchedule& s) {
  nlohmann::ordered_json j;
  j["t_star"] = s.t_star;
  j["mu"] = s.mu;
  j["phi"] = s.phi;
  j["s"] = s.s;
  j["prefactor"] = s.prefactor;
  j["convention"] = to_string(s.convention);
  j["chi"] = cfg.model.chi;
  j["field_decay"] = cfg.model.field_decay;
  j["atom_decay"] = cfg.model.atom_decay;
  j["theta"] = cfg.model.theta;
  return j;
}

inline int cmd_schedule(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const auto sched = find_measurement_time(cfg.model, cfg.schedule_horizon(), cfg.convention);
    out << schedule_json(cfg, sched).dump() << "\n";
    return kOk;
  } catch (const NoCrossing& e) {
    err << "schedule: " << e.what() << "\n";
    nlohmann::ordered_json j;
    j["error"] = "NoCrossing";
    j["horizon"] = e.horizon();
    out << j.dump() << "\n";
    return kInapplicable;
  }
}

// ---------------------------------------------------------------------------
// reconstruct / qpd
// ---------------------------------------------------------------------------

inline std::string reconstruction_csv(const std::vector<ReconstructionRecord>& records,
                                      const MeasurementSchedule& sched, Engine engine) {
  std::string out = "re_alpha,im_alpha,sigma_x,f_hat,f_direct,abs_error\n";
  double max_err = 0.0;
  int warnings = 0;
  for (const auto& r : records) {
    out += format_double(r.alpha.real()) + "," + format_double(r.alpha.imag()) + "," + format_double(r.sigma_x) +
           "," + format_double(r.f_hat) + "," + format_double(r.f_direct) + "," + format_double(r.abs_error) + "\n";
    max_err = std::max(max_err, r.abs_error);
    warnings += r.truncation_warning ? 1 : 0;
  }
  out += "# t_star=" + format_double(sched.t_star) + "\n";
  out += "# mu=" + format_double(sched.mu) + "\n";
  out += "# s=" + format_double(sched.s) + "\n";
  out += std::string("# convention=") + to_string(sched.convention) + "\n";
  out += std::string("# engine=") + to_string(engine) + "\n";
  out += "# max_abs_error=" + format_double(max_err) + "\n";
  out += "# truncation_warnings=" + std::to_string(warnings) + "\n";
  return out;
}

inline int cmd_reconstruct(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  const FieldDensityMatrix field = cfg.initial_field.build(cfg.model.dim);
  MeasurementSchedule sched;
  try {
    sched = find_measurement_time(cfg.model, cfg.schedule_horizon(), cfg.convention);
  } catch (const NoCrossing& e) {
    err << "reconstruct: " << e.what() << "\n";
    return kInapplicable;
  }
  const auto records =
      reconstruct_grid(cfg.model, field, cfg.grid, sched, cfg.engine, cfg.integrator, cfg.threads);
  const std::string path = cfg.output_or("reconstruct.csv");
  write_text_file(path, reconstruction_csv(records, sched, cfg.engine));
  double max_err = 0.0;
  for (const auto& r : records) max_err = std::max(max_err, r.abs_error);
  out << "wrote " << path << " (" << records.size() << " points, max_abs_error "
      << format_double(max_err) << ")\n";
  return kOk;
}

inline std::string qpd_csv(const RealMatrix& values, const PhaseGrid& grid, double s, QpdConvention conv) {
  std::string out = "re_alpha,im_alpha,f_direct\n";
  for (Index i = 0; i < grid.n_re; ++i)
    for (Index j = 0; j < grid.n_im; ++j) {
      const cplx a = grid.point(i, j);
      out += format_double(a.real()) + "," + format_double(a.imag()) + "," + format_double(values(i, j)) + "\n";
    }
  out += "# s=" + format_double(s) + "\n";
  out += std::string("# convention=") + to_string(conv) + "\n";
  return out;
}

inline int cmd_qpd(const ScenarioConfig& cfg, std::ostream& out) {
  const FieldDensityMatrix field = cfg.initial_field.build(cfg.model.dim);
  const RealMatrix values = qpd_grid(field, cfg.grid, cfg.qpd_s, cfg.convention, cfg.threads);
  const std::string path = cfg.output_or("qpd.csv");
  write_text_file(path, qpd_csv(values, cfg.grid, cfg.qpd_s, cfg.convention));
  out << "wrote " << path << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double x) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << x;
  return os.str();
}

inline CheckResult run_check(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    CheckResult r = body();
    r.name = name;
    return r;
  } catch (const std::exception& e) {
    return {name, false, std::string("error: ") + e.what()};
  }
}

inline double mean_photon_number(const FieldDensityMatrix& f) {
  double n = 0.0;
  for (Index k = 0; k < f.dim(); ++k) n += static_cast<double>(k) * f(k, k).real();
  return n;
}

}  // namespace detail

/// Physics checks for one scenario. Schedule must exist (NoCrossing escapes).
inline std::vector<CheckResult> verify_checks(const ScenarioConfig& cfg) {
  using detail::run_check;
  using detail::sci;

  const ModelParams& p = cfg.model;
  const FieldDensityMatrix field = cfg.initial_field.build(p.dim);
  const MeasurementSchedule sched = find_measurement_time(p, cfg.schedule_horizon(), cfg.convention);
  std::vector<CheckResult> out;

  out.push_back(run_check("schedule_validity", [&] {
    const cplx z = z_factor(p, sched.t_star);
    const bool ok = std::abs(z.imag()) <= 1e-10 && z.real() < 0.0 && sched.mu > 0.0 && sched.mu <= 1.0 + 1e-12 &&
                    sched.s > -1.0 && sched.s <= 1e-12;
    return CheckResult{"", ok, "t*=" + sci(sched.t_star) + " |Im z|=" + sci(std::abs(z.imag())) + " s=" + sci(sched.s)};
  }));

  out.push_back(run_check("oracle_equivalence", [&] {
    const FieldDensityMatrix prepared = displaced_field(field, cplx(0.0, 0.0));
    const auto joint = product_state(atom::superposition_state(p.theta), prepared);
    const auto rk = evolve_rk4(joint, p, sched.t_star, cfg.integrator);
    const double diff = max_abs(rk.state.matrix() - evolve_closed_form(p, prepared, sched.t_star).matrix());
    return CheckResult{"", diff <= 1e-6, "max|closed - rk4|=" + sci(diff) + " (tol 1e-6)"};
  }));

  out.push_back(run_check("trajectory_physicality", [&] {
    const auto joint = prepare_initial(p, field, cplx(0.0, 0.0));
    const long steps = static_cast<long>(std::ceil(sched.t_star / cfg.integrator.dt - 1e-9));
    const long stride = std::max(1L, steps / 10);
    long step = 0;
    double worst_trace = 0.0, worst_herm = 0.0, worst_eig = 0.0;
    evolve_rk4(joint, p, sched.t_star, cfg.integrator, [&](double, const Matrix& rho) {
      ++step;
      if (step % stride != 0 && step != steps) return;
      worst_trace = std::max(worst_trace, std::abs(rho.trace().real() - 1.0));
      worst_herm = std::max(worst_herm, hermiticity_error(rho));
      worst_eig = std::min(worst_eig, hermitian_min_eigenvalue(0.5 * (rho + rho.adjoint())));
    });
    const bool ok = worst_trace <= 1e-7 && worst_herm <= 1e-9 && worst_eig >= -1e-6;
    return CheckResult{"", ok, "trace " + sci(worst_trace) + " herm " + sci(worst_herm) + " min eig " + sci(worst_eig)};
  }));

  out.push_back(run_check("closed_form_physicality", [&] {
    const auto rho = evolve_closed_form(p, displaced_field(field, cplx(0.0, 0.0)), sched.t_star);
    const double tr = std::abs(rho.trace().real() - 1.0);
    const double eig = hermitian_min_eigenvalue(rho.matrix());
    return CheckResult{"", tr <= 1e-8 && eig >= -1e-7, "trace " + sci(tr) + " min eig " + sci(eig)};
  }));

  // Normalization on a box wide enough for the state, evaluated in a Fock
  // space large enough that the box corners respect |alpha|^2 <= M/4.
  const double half_width = std::max(4.0, std::sqrt(detail::mean_photon_number(field)) + 4.0);
  const PhaseGrid box{-half_width, half_width, -half_width, half_width, 81, 81};
  const Index big_dim = std::min<Index>(256, std::max<Index>(p.dim, static_cast<Index>(std::ceil(8.0 * half_width * half_width))));

  out.push_back(run_check("wigner_normalization", [&] {
    const FieldDensityMatrix big = field.padded(big_dim);
    const double norm = grid_integral(qpd_grid(big, box, 0.0, QpdConvention::normalized, cfg.threads), box);
    const double lit = grid_integral(qpd_grid(big, box, 0.0, QpdConvention::paper_literal, cfg.threads), box);
    const bool ok = std::abs(norm - 1.0) <= 0.01 && std::abs(lit - 0.5) <= 0.005;
    return CheckResult{"", ok, "normalized " + sci(norm) + " paper " + sci(lit)};
  }));

  out.push_back(run_check("husimi_nonnegative", [&] {
    const RealMatrix q = qpd_grid(field.padded(big_dim), box, -1.0, cfg.convention, cfg.threads);
    const double lo = q.minCoeff();
    return CheckResult{"", lo >= -1e-12, "min Q " + sci(lo)};
  }));

  out.push_back(run_check("reconstruction_identity", [&] {
    const auto recs = reconstruct_grid(p, field, cfg.grid, sched, cfg.engine, cfg.integrator, cfg.threads);
    double worst = 0.0;
    for (const auto& r : recs) worst = std::max(worst, r.abs_error);
    const double tol = cfg.engine == Engine::analytic ? 1e-5 : 1e-3;
    return CheckResult{"", worst <= tol, "max|F_hat - F|=" + sci(worst) + " (tol " + sci(tol) + ")"};
  }));

  out.push_back(run_check("wigner_limit", [&] {
    ModelParams ideal = p;
    ideal.field_decay = 1e-9;
    const auto s0 = find_measurement_time(ideal, cfg.convention);
    const PhaseGrid g5{cfg.grid.re_min, cfg.grid.re_max, cfg.grid.im_min, cfg.grid.im_max, 5, 5};
    const auto recs = reconstruct_grid(ideal, field, g5, s0, Engine::analytic, cfg.integrator, cfg.threads);
    const double scale = cfg.convention == QpdConvention::normalized ? 1.0 : 0.5;
    double worst = 0.0;
    for (const auto& r : recs) worst = std::max(worst, std::abs(r.f_hat - scale * wigner_parity(field, r.alpha)));
    return CheckResult{"", std::abs(s0.s) <= 1e-6 && worst <= 1e-5, "|s|=" + sci(std::abs(s0.s)) + " max dev " + sci(worst)};
  }));

  out.push_back(run_check("atom_decay_cancellation", [&] {
    const PhaseGrid g3{cfg.grid.re_min, cfg.grid.re_max, cfg.grid.im_min, cfg.grid.im_max, 3, 3};
    std::vector<double> ref;
    double worst = 0.0;
    for (double big_g : {0.0, 0.1, 0.5}) {
      ModelParams q = p;
      q.atom_decay = big_g;
      const auto sq = find_measurement_time(q, cfg.schedule_horizon(), cfg.convention);
      const auto recs = reconstruct_grid(q, field, g3, sq, Engine::analytic, cfg.integrator, cfg.threads);
      for (std::size_t i = 0; i < recs.size(); ++i) {
        if (ref.size() < recs.size()) ref.push_back(recs[i].f_hat);
        else worst = std::max(worst, std::abs(recs[i].f_hat - ref[i]));
      }
    }
    return CheckResult{"", worst <= 1e-6, "max F_hat variation " + sci(worst)};
  }));

  return out;
}

inline int cmd_verify(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<CheckResult> checks;
  try {
    checks = verify_checks(cfg);
  } catch (const NoCrossing& e) {
    err << "verify: " << e.what() << "\n";
    return kInapplicable;
  }
  bool all = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(26) << c.name << " " << c.detail << "\n";
    all = all && c.passed;
  }
  if (!all) {
    for (const auto& c : checks)
      if (!c.passed) err << "verify: check '" << c.name << "' failed\n";
  }
  return all ? kOk : kFailure;
}

}  // namespace qpdrec::cli

#endif  // QPDREC_CLI_COMMANDS_HPP
