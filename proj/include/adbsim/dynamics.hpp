#pragma once

// Closed-loop Lindblad integration. Controls are recomputed from the
// nominal state at every Runge-Kutta stage; when noise is present a second
// (noisy) state is co-evolved under the nominal controls.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "adbsim/control.hpp"
#include "adbsim/model.hpp"

namespace adb {

class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
  double dt = 0.02;
  double t_end = 100.0;
  std::size_t record_stride = 50;
  std::size_t audit_stride = 500;
  bool store_states = false;

  /// dt > 0, t_end >= 0, strides >= 1, dt * fastest_frequency <= 0.15.
  void validate(const CompiledModel& model) const;
  std::size_t steps() const;
};

/// Systematic (lambda) and white stochastic (eta) amplitude errors on the
/// atom-1 laser drive, H_e = Omega1(t) H1(t). The noise enters only through
/// its ensemble average.
struct NoiseSpec {
  double lambda = 0.0;
  double eta = 0.0;
  void validate() const;
};

/// Generator dissipator: standard kind gives D[L]rho, squeezed kind gives
/// (N+1) D[L] + N D[L^dag] - M D'[L] - M* D'[L^dag].
Operator dissipator_apply(const DissipatorChannel& channel, const DensityMatrix& rho);

/// Reference (dense) right-hand side: -i[H(t), rho] + sum of dissipators,
/// plus -i lambda [H_e, rho] - eta^2/2 [H_e, [H_e, rho]] when noise is given.
Operator master_rhs(const CompiledModel& model, double t, const DensityMatrix& rho, const ControlSignal& signal,
                    const NoiseSpec* noise = nullptr);

/// Error Hamiltonian H_e = Omega1(t) H1(t) for the current feedback signal.
Operator error_hamiltonian(const CompiledModel& model, double t, const ControlSignal& signal);

struct Speeds {
  double S = 0.0, T = 0.0, gg = 0.0, ff = 0.0, D = 0.0;
};

/// V_x = Tr(rhs rho_x), with controls evaluated from rho.
Speeds speeds(const CompiledModel& model, const ControlLaw& law, double t, const DensityMatrix& rho);

/// Sparse evaluation of the closed-loop generator used by the integrator.
/// Assumes Hermitian rho; results are Hermitian by construction.
class LindbladKernel {
 public:
  LindbladKernel(const CompiledModel& model, const ControlLaw& law);

  ControlEvaluation controls(double t, const Matrix& rho) const;
  void rhs(double t, const Matrix& rho, const ControlSignal& signal, const NoiseSpec* noise, Matrix& out) const;
  std::size_t dim() const { return dim_; }

 private:
  using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
  struct Term {
    Sparse op;
    Sparse op_dag;
    Harmonic coeff;
    int channel = -1;  // -1 for drives, otherwise control channel
  };
  struct Channel {
    Sparse op;
    Sparse op_dag;
    Sparse ll;      // L L, squeezed kind only
    Sparse ll_dag;  // L^dag L^dag
    ChannelKind kind;
    double n;
    Complex m;
  };

  void apply_hamiltonian(double t, const Matrix& rho, const ControlSignal& signal, Matrix& h_rho) const;
  void apply_error_hamiltonian(double t, const Matrix& x, const ControlSignal& signal, Matrix& out) const;

  std::size_t dim_;
  Sparse h_static_;
  std::vector<Term> terms_;
  std::vector<Channel> channels_;
  Sparse anticomm_;  // sum of weighted L^dag L pieces entering -1/2 {., rho}
  std::vector<Term> laser1_;  // channel-0 generator (carries Omega1)
  double laser1_base_;
  double K1_, K2_;
  Vector target_;
  Vector repel_;
  std::optional<double> max_amplitude_;
};

struct TrajectoryPoint {
  double t = 0.0;
  double P_S = 0.0, P_T = 0.0, P_gg = 0.0, P_ff = 0.0, P_D = 0.0;
  ControlSignal controls;
  Speeds v;
  double fidelity = 0.0;
  /// Target population of the nominal (noise-free) state; equals P_S without noise.
  double nominal_P_S = 0.0;
};

struct TrajectoryMetadata {
  std::optional<double> stabilization_time;
  std::vector<std::string> warnings;
  std::size_t renormalizations = 0;
  double max_trace_drift = 0.0;
  double max_hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;
  double max_imag_residue = 0.0;
  bool noisy = false;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::vector<DensityMatrix> states;  // only when store_states
  std::optional<DensityMatrix> final_state;
  std::optional<DensityMatrix> final_noisy_state;
  TrajectoryMetadata metadata;
  double record_interval = 0.0;

  std::vector<double> times() const;
  std::vector<double> series(double TrajectoryPoint::*field) const;
};

/// Fixed-step RK4 with stage-consistent feedback. Throws IntegratorError on
/// audit failure (trace drift > 1e-6 or min eigenvalue < -1e-6).
Trajectory integrate_closed_loop(const CompiledModel& model, const ControlLaw& law, const DensityMatrix& rho0,
                                 const IntegratorConfig& cfg, const std::optional<NoiseSpec>& noise = std::nullopt);

}  // namespace adb
