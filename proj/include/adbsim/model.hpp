#pragma once

// Hamiltonians, dissipators and special states for the two-atom cavity
// system in three tiers: lab frame, squeezed rotating frame, and the
// five-state effective model.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "adbsim/operator_algebra.hpp"

namespace adb {

/// Raised for invalid physical parameters (negative rates, above-threshold pump).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical parameters, all in units of the bare coupling g.
struct ModelSpec {
  double g = 1.0;
  double kappa = 0.1;
  double gamma = 1.0 / 3.0;
  double omega0 = 0.1;
  double omega0_mw = 0.02;
  double delta = 0.04;
  double r_p = 0.0;
  double theta_p = 0.0;
  double r_e = 0.0;
  double theta_e = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  std::size_t fock_cutoff = 5;
  /// Cavity detuning; only the lab-frame tier reads it.
  std::optional<double> delta_c;

  void validate() const;
  double g_sc() const { return g * std::cosh(r_p); }
  bool operator==(const ModelSpec&) const = default;
};

/// The reference parameter set: C = g^2/(kappa gamma) = 30, kappa = 0.3 gamma,
/// Omega0 = 0.1 g_sc, Omega0_MW = 0.2 Omega0, delta = 0.4 Omega0, matched
/// squeezed reservoir (r_e = r_p, theta_e + theta_p = pi).
ModelSpec reference_spec(double r_p, double K1, double K2);

struct SqueezingParameters {
  double r_p = 0.0;
  double omega_sc = 0.0;
  double alpha = 0.0;
};

/// Bogoliubov diagonalization of Delta_c a^dag a + Omega_p (e^{i theta} a^2 + h.c.):
/// alpha = 2 Omega_p / Delta_c, r_p = 1/4 ln[(1+alpha)/(1-alpha)],
/// omega_sc = Delta_c sqrt(1 - alpha^2). Throws for |alpha| >= 1.
SqueezingParameters squeezing_parameters(double omega_p, double delta_c);

/// Pump amplitude that yields squeezing r_p at detuning delta_c.
double pump_for_squeezing(double r_p, double delta_c);

/// cosh(r) a + e^{-i theta} sinh(r) a^dag.
Operator bogoliubov(const Operator& a, double r_p, double theta_p);

struct ReservoirCoefficients {
  double n = 0.0;
  Complex m{};
};

/// Effective thermal occupation and two-photon correlation seen by the
/// squeezed-cavity mode when a squeezed vacuum (r_e, theta_e) drives the cavity.
ReservoirCoefficients reservoir_coeffs(double r_p, double theta_p, double r_e, double theta_e);

enum class ChannelKind { standard, squeezed_reservoir };

struct DissipatorChannel {
  std::string name;
  ChannelKind kind = ChannelKind::standard;
  Operator op;
  double n = 0.0;   // squeezed_reservoir only
  Complex m{};      // squeezed_reservoir only

  static DissipatorChannel standard(std::string name, Operator op);
  static DissipatorChannel squeezed(std::string name, Operator op, double n, Complex m);
};

/// amplitude * exp(i frequency t)
struct Harmonic {
  Complex amplitude{1.0, 0.0};
  double frequency = 0.0;
  Complex operator()(double t) const { return amplitude * std::exp(kI * (frequency * t)); }
};

/// Contributes c(t) O + conj(c(t)) O^dag to the Hamiltonian.
struct DriveTerm {
  std::string name;
  Operator op;
  Harmonic coeff;
};

/// Contributes Xi_channel(t) [c(t) O + conj(c(t)) O^dag]. Channel 0 carries Xi1,
/// channel 1 carries Xi2.
struct ControlTerm {
  int channel = 0;
  Operator op;
  Harmonic coeff;
};

struct ControlSignal {
  double xi1 = 0.0;
  double xi2 = 0.0;
};

enum class ModelTier { effective, full_squeezed, lab_frame };

std::string to_string(ModelTier tier);
ModelTier tier_from_string(const std::string& name);

/// The five states spanning the effective subspace.
struct BellBasis {
  Ket S, T, D, gg, ff;
  std::vector<Ket> as_list() const { return {S, T, gg, ff, D}; }
};

struct CompiledModel {
  ModelTier tier = ModelTier::effective;
  ModelSpec spec;
  LayoutPtr layout;
  Operator h_static;
  std::vector<DriveTerm> drives;
  std::vector<ControlTerm> controls;
  std::vector<DissipatorChannel> channels;
  BellBasis basis;
  /// Initial state of the mode factor, used to build reduced projectors.
  std::optional<Ket> mode_vacuum;
  std::vector<std::string> warnings;

  /// Hamiltonian at time t with the given feedback signal.
  Operator hamiltonian(double t, const ControlSignal& signal) const;
  /// Hermitian generator multiplying Xi_{channel+1} at time t.
  Operator control_hamiltonian(int channel, double t) const;
  /// Largest rate/frequency scale of the model, used for step-size checks.
  double fastest_frequency() const;
};

/// Squeezed rotating frame: the simulated mode is the squeezed-cavity mode
/// itself, coupled at g_sc and decaying into an ordinary vacuum.
CompiledModel build_squeezed_frame_model(const ModelSpec& spec);

/// Lab frame with explicit parametric pump and squeezed-vacuum reservoir.
/// Requires spec.delta_c; the excited-state detuning is set to omega_sc.
CompiledModel build_lab_frame_model(const ModelSpec& spec);

/// Five-state model on {psi_gg, T, S, psi_ff, D} (indices 0..4).
CompiledModel build_effective_model(const ModelSpec& spec);

CompiledModel build_model(ModelTier tier, const ModelSpec& spec);

/// Truncated squeezed vacuum annihilated by cosh(r) a + e^{-i theta} sinh(r) a^dag,
/// renormalized. Throws if the truncated norm is below 0.999.
Ket squeezed_vacuum_ket(double r, std::size_t cutoff, double theta = 0.0);

/// S, T, D, gg, ff on a two-atom layout; the mode factor (if any) is put in `mode_state`
/// or in Fock vacuum when not given. D = (|eg> - |ge>)/sqrt 2.
BellBasis bell_basis(const LayoutPtr& layout, const std::optional<Ket>& mode_state = std::nullopt);

/// Layout of the effective tier and its basis.
LayoutPtr effective_layout();
BellBasis effective_basis(const LayoutPtr& layout);

/// Projector onto an atomic two-atom state tensored with identity on the mode,
/// so that populations are insensitive to the mode frame.
Operator atomic_projector(const LayoutPtr& layout, const Vector& atomic_state);

}  // namespace adb
