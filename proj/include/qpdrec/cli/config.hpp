#ifndef QPDREC_CLI_CONFIG_HPP
#define QPDREC_CLI_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "qpdrec/fock_algebra.hpp"
#include "qpdrec/lindblad_oracle.hpp"
#include "qpdrec/protocol.hpp"
#include "qpdrec/quasiprobability.hpp"

namespace qpdrec::cli {

/// Problem in a scenario file; carries the line number when known.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct InitialField {
  enum class Kind { vacuum, fock, coherent, thermal };
  Kind kind = Kind::coherent;
  Index photons = 0;
  cplx amplitude{0.5, 0.3};
  double nbar = 0.0;

  FieldDensityMatrix build(Index dim) const {
    switch (kind) {
      case Kind::vacuum: return fock_state(0, dim);
      case Kind::fock: return fock_state(photons, dim);
      case Kind::coherent: return coherent_state(amplitude, dim);
      case Kind::thermal: return thermal_state(nbar, dim);
    }
    throw ConfigError("unknown field kind");
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::vacuum: os << "vacuum"; break;
      case Kind::fock: os << "fock n=" << photons; break;
      case Kind::coherent: os << "coherent beta=" << amplitude.real() << (amplitude.imag() < 0 ? "" : "+") << amplitude.imag() << "i"; break;
      case Kind::thermal: os << "thermal nbar=" << nbar; break;
    }
    return os.str();
  }
};

struct ScenarioConfig {
  ModelParams model;
  InitialField initial_field;
  PhaseGrid grid;
  Engine engine = Engine::analytic;
  QpdConvention convention = QpdConvention::normalized;
  IntegratorConfig integrator;
  std::string output_path;  // empty: each command picks its own file name
  double qpd_s = 0.0;
  std::optional<double> horizon;
  unsigned threads = 0;

  void validate() const {
    model.validate();
    grid.validate();
    integrator.validate();
    if (!(qpd_s < 1.0)) throw ConfigError("qpd.s must be < 1");
    if (horizon && !(*horizon > 0.0)) throw ConfigError("schedule.horizon must be > 0");
  }

  double schedule_horizon() const { return horizon ? *horizon : default_horizon(model); }

  std::string output_or(const std::string& fallback) const { return output_path.empty() ? fallback : output_path; }
};

/// Default scenario: chi = 1, gamma = 0.05, Gamma = 0.1, theta = pi/5, N = 32,
/// coherent beta = 0.5 + 0.3i on a 9x9 grid over [-1.5, 1.5]^2.
inline ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.model.chi = 1.0;
  c.model.field_decay = 0.05;
  c.model.atom_decay = 0.1;
  c.model.theta = kPi / 5.0;
  c.model.dim = 32;
  c.grid = PhaseGrid{-1.5, 1.5, -1.5, 1.5, 9, 9};
  return c;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v, const std::string& where) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(where + ": expected a real number, got '" + std::string(v) + "'");
  return out;
}

inline long long parse_int(std::string_view v, const std::string& where) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(where + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + std::string(v) + "'");
}

}  // namespace detail

inline Engine parse_engine(std::string_view v) {
  if (v == "analytic") return Engine::analytic;
  if (v == "oracle") return Engine::oracle;
  throw ConfigError("engine must be 'analytic' or 'oracle', got '" + std::string(v) + "'");
}

inline QpdConvention parse_convention(std::string_view v) {
  if (v == "paper" || v == "paper_literal") return QpdConvention::paper_literal;
  if (v == "normalized") return QpdConvention::normalized;
  throw ConfigError("convention must be 'paper' or 'normalized', got '" + std::string(v) + "'");
}

/// Parses flat `key = value` lines with dotted sections, on top of the
/// default scenario. `#` starts a comment. Unknown or repeated keys are
/// errors.
inline ScenarioConfig parse_config(std::string_view text) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;

  ScenarioConfig c = default_scenario();
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view val = detail::trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw ConfigError(where + ": empty key or value");
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh)
      throw ConfigError(where + ": key '" + key + "' already set on line " + std::to_string(it->second));
    const std::string ctx = where + " (" + key + ")";

    if (key == "model.chi") c.model.chi = parse_double(val, ctx);
    else if (key == "model.field_decay") c.model.field_decay = parse_double(val, ctx);
    else if (key == "model.atom_decay") c.model.atom_decay = parse_double(val, ctx);
    else if (key == "model.theta") c.model.theta = parse_double(val, ctx);
    else if (key == "model.dim") c.model.dim = static_cast<Index>(parse_int(val, ctx));
    else if (key == "field.kind") {
      if (val == "vacuum") c.initial_field.kind = InitialField::Kind::vacuum;
      else if (val == "fock") c.initial_field.kind = InitialField::Kind::fock;
      else if (val == "coherent") c.initial_field.kind = InitialField::Kind::coherent;
      else if (val == "thermal") c.initial_field.kind = InitialField::Kind::thermal;
      else throw ConfigError(ctx + ": unknown field kind '" + std::string(val) + "'");
    }
    else if (key == "field.n") c.initial_field.photons = static_cast<Index>(parse_int(val, ctx));
    else if (key == "field.re") c.initial_field.amplitude.real(parse_double(val, ctx));
    else if (key == "field.im") c.initial_field.amplitude.imag(parse_double(val, ctx));
    else if (key == "field.nbar") c.initial_field.nbar = parse_double(val, ctx);
    else if (key == "grid.re_min") c.grid.re_min = parse_double(val, ctx);
    else if (key == "grid.re_max") c.grid.re_max = parse_double(val, ctx);
    else if (key == "grid.im_min") c.grid.im_min = parse_double(val, ctx);
    else if (key == "grid.im_max") c.grid.im_max = parse_double(val, ctx);
    else if (key == "grid.n_re") c.grid.n_re = static_cast<Index>(parse_int(val, ctx));
    else if (key == "grid.n_im") c.grid.n_im = static_cast<Index>(parse_int(val, ctx));
    else if (key == "engine") c.engine = parse_engine(val);
    else if (key == "convention") c.convention = parse_convention(val);
    else if (key == "integrator.dt") c.integrator.dt = parse_double(val, ctx);
    else if (key == "integrator.renormalize") c.integrator.renormalize = parse_bool(val, ctx);
    else if (key == "integrator.drift_tolerance") c.integrator.drift_tolerance = parse_double(val, ctx);
    else if (key == "output.path") c.output_path = std::string(val);
    else if (key == "qpd.s") c.qpd_s = parse_double(val, ctx);
    else if (key == "schedule.horizon") c.horizon = parse_double(val, ctx);
    else if (key == "run.threads") c.threads = static_cast<unsigned>(parse_int(val, ctx));
    else throw ConfigError(where + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace qpdrec::cli

#endif  // QPDREC_CLI_CONFIG_HPP
