#pragma once

// Lyapunov state feedback. Xi1 raises the target population directly;
// Xi2 pushes population out of psi_gg, where the decay tends to pile it up.

#include <optional>
#include <stdexcept>
#include <vector>

#include "adbsim/model.hpp"
#include "adbsim/operator_algebra.hpp"

namespace adb {

class ControlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ControlLaw {
  double K1 = 0.0;
  double K2 = 0.0;
  Operator target_projector;  // |S><S|
  Operator repel_projector;   // |psi_gg><psi_gg|
  std::vector<ControlTerm> terms;
  /// Optional |Xi_j| clamp; off unless set.
  std::optional<double> max_amplitude;

  /// H1 (channel 0) or H2 (channel 1) at time t.
  Operator control_hamiltonian(int channel, double t) const;
};

ControlLaw make_control_law(const CompiledModel& model);
ControlLaw make_control_law(const CompiledModel& model, double K1, double K2);

struct ControlEvaluation {
  ControlSignal signal;
  /// max_j |Im(Xi_j)| before the real projection.
  double imag_residue = 0.0;
  /// Set when the residue exceeds 1e-8 max(K_j, 1).
  bool hermiticity_flag = false;
};

/// Xi1 = Re(-i K1 Tr{[rho_S, H1] rho}),  Xi2 = Re(+i K2 Tr{[rho_gg, H2] rho}).
/// Throws ControlError on non-finite output.
ControlEvaluation evaluate_controls(const ControlLaw& law, double t, const DensityMatrix& rho);

struct DriveAmplitudes {
  Complex omega1;
  Complex omega2;
  Complex omega1_mw;
  Complex omega2_mw;
};

/// Only atom 1 carries the feedback:
/// Omega1 = Omega0/sqrt2 + Xi1, Omega2 = e^{i pi} Omega0/sqrt2,
/// Omega1_MW = Omega0_MW/sqrt2 + Xi2, Omega2_MW = Omega0_MW/sqrt2.
DriveAmplitudes modulated_amplitudes(double omega0, double omega0_mw, const ControlSignal& signal);

}  // namespace adb
