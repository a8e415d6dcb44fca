#ifndef QPDREC_TOOLS_CLI_APP_HPP
#define QPDREC_TOOLS_CLI_APP_HPP

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qpdrec/cli/commands.hpp"
#include "qpdrec/cli/config.hpp"

namespace qpdrec::cli {

struct CommonFlags {
  std::string config_path;
  std::string engine;
  std::string convention;
  std::string out_path;
};

inline void add_common_flags(CLI::App& sub, CommonFlags& flags) {
  sub.add_option("--config", flags.config_path, "Scenario file (key = value lines)");
  sub.add_option("--engine", flags.engine, "analytic | oracle")->check(CLI::IsMember({"analytic", "oracle"}));
  sub.add_option("--convention", flags.convention, "paper | normalized")
      ->check(CLI::IsMember({"paper", "normalized"}));
  sub.add_option("--out", flags.out_path, "Output file");
}

inline ScenarioConfig resolve_config(const CommonFlags& flags) {
  ScenarioConfig cfg = flags.config_path.empty() ? default_scenario() : load_config(flags.config_path);
  if (!flags.engine.empty()) cfg.engine = parse_engine(flags.engine);
  if (!flags.convention.empty()) cfg.convention = parse_convention(flags.convention);
  if (!flags.out_path.empty()) cfg.output_path = flags.out_path;
  cfg.validate();
  return cfg;
}

/// Entry point shared by the executable and the tests. Exit codes:
/// 0 success, 1 failure (bad input, failed verification, I/O),
/// 2 protocol inapplicable (no phi = pi crossing).
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasiprobability reconstruction from atomic polarization under field and atomic decay"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* figure1 = app.add_subcommand("figure1", "Sample the crossing-function curves to CSV");
  auto* schedule = app.add_subcommand("schedule", "Find the measurement time t*, mu and s");
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct F(alpha, s) over the configured grid");
  auto* verify = app.add_subcommand("verify", "Run physics and equivalence checks");
  auto* qpd = app.add_subcommand("qpd", "Evaluate F(alpha, s) of the configured state directly");
  for (auto* sub : {figure1, schedule, reconstruct, verify, qpd}) add_common_flags(*sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kFailure;
  }

  try {
    const ScenarioConfig cfg = resolve_config(flags);
    if (figure1->parsed()) return cmd_figure1(cfg, out);
    if (schedule->parsed()) return cmd_schedule(cfg, out, err);
    if (reconstruct->parsed()) return cmd_reconstruct(cfg, out, err);
    if (verify->parsed()) return cmd_verify(cfg, out, err);
    if (qpd->parsed()) return cmd_qpd(cfg, out);
  } catch (const NoCrossing& e) {
    err << "error: " << e.what() << "\n";
    return kInapplicable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace qpdrec::cli

#endif  // QPDREC_TOOLS_CLI_APP_HPP
