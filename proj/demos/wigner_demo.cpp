// Reconstructs the Wigner-like quasiprobability of a coherent state from the
// simulated atomic polarization and compares it with the direct evaluation.
#include <cstdio>

#include "qpdrec/protocol.hpp"

int main() {
  using namespace qpdrec;

  ModelParams p;
  p.chi = 1.0;
  p.field_decay = 0.05;
  p.atom_decay = 0.1;
  p.theta = kPi / 5.0;
  p.dim = 24;

  const FieldDensityMatrix field = coherent_state({0.5, 0.3}, p.dim);
  const MeasurementSchedule sched = find_measurement_time(p);
  std::printf("t* = %.6f  mu = %.6f  s = %.6f\n", sched.t_star, sched.mu, sched.s);

  const PhaseGrid grid{-1.0, 1.0, -1.0, 1.0, 5, 5};
  const auto records = reconstruct_grid(p, field, grid, sched, Engine::analytic);
  std::printf("%8s %8s %12s %12s %10s\n", "re", "im", "f_hat", "f_direct", "error");
  for (const auto& r : records)
    std::printf("%8.3f %8.3f %12.8f %12.8f %10.2e\n", r.alpha.real(), r.alpha.imag(), r.f_hat, r.f_direct,
                r.abs_error);
  return 0;
}
