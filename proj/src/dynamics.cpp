#include "adbsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace adb {

namespace {

constexpr double kSqrt1_2 = 1.0 / std::numbers::sqrt2;

Matrix lindblad_d(const Matrix& o, const Matrix& rho) {
  const Matrix od = o.adjoint();
  const Matrix odo = od * o;
  return o * rho * od - 0.5 * (odo * rho + rho * odo);
}

Matrix lindblad_d_prime(const Matrix& o, const Matrix& rho) {
  const Matrix oo = o * o;
  return o * rho * o - 0.5 * (oo * rho + rho * oo);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

// ------------------------------------------------------------ config/noise

void IntegratorConfig::validate(const CompiledModel& model) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw IntegratorError("dt must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw IntegratorError("t_end must be >= 0");
  if (record_stride == 0 || audit_stride == 0) throw IntegratorError("strides must be >= 1");
  const double w = model.fastest_frequency();
  if (dt * w > 0.15 + 1e-12) {
    std::ostringstream os;
    os << "dt = " << dt << " too large: dt * fastest frequency = " << dt * w << " > 0.15";
    throw IntegratorError(os.str());
  }
}

std::size_t IntegratorConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

void NoiseSpec::validate() const {
  if (!(lambda >= 0.0) || !(eta >= 0.0)) throw IntegratorError("noise amplitudes must be >= 0");
}

// ------------------------------------------------------ reference generator

Operator dissipator_apply(const DissipatorChannel& channel, const DensityMatrix& rho) {
  require_same_layout(channel.op.layout_ptr(), rho.layout_ptr(), "dissipator_apply");
  const Matrix& l = channel.op.matrix();
  const Matrix& r = rho.matrix();
  if (channel.kind == ChannelKind::standard) return {rho.layout_ptr(), lindblad_d(l, r)};
  const Matrix ld = l.adjoint();
  Matrix out = (channel.n + 1.0) * lindblad_d(l, r) + channel.n * lindblad_d(ld, r) - channel.m * lindblad_d_prime(l, r) -
               std::conj(channel.m) * lindblad_d_prime(ld, r);
  return {rho.layout_ptr(), std::move(out)};
}

Operator error_hamiltonian(const CompiledModel& model, double t, const ControlSignal& signal) {
  const double omega1 = model.spec.omega0 * kSqrt1_2 + signal.xi1;
  return model.control_hamiltonian(0, t) * Complex{omega1, 0.0};
}

Operator master_rhs(const CompiledModel& model, double t, const DensityMatrix& rho, const ControlSignal& signal,
                    const NoiseSpec* noise) {
  require_same_layout(model.layout, rho.layout_ptr(), "master_rhs");
  const Matrix h = model.hamiltonian(t, signal).matrix();
  const Matrix& r = rho.matrix();
  Matrix out = -kI * (h * r - r * h);
  for (const auto& c : model.channels) out += dissipator_apply(c, rho).matrix();
  if (noise) {
    const Matrix he = error_hamiltonian(model, t, signal).matrix();
    const Matrix c1 = he * r - r * he;
    out += -kI * noise->lambda * c1 - 0.5 * noise->eta * noise->eta * (he * c1 - c1 * he);
  }
  if (!all_finite(out)) throw IntegratorError("non-finite master-equation right-hand side (step-size failure)");
  return {rho.layout_ptr(), std::move(out)};
}

Speeds speeds(const CompiledModel& model, const ControlLaw& law, double t, const DensityMatrix& rho) {
  const auto ev = evaluate_controls(law, t, rho);
  const Matrix d = master_rhs(model, t, rho, ev.signal).matrix();
  auto v = [&](const Ket& k) { return k.amplitudes().dot(d * k.amplitudes()).real(); };
  const auto& b = model.basis;
  return Speeds{v(b.S), v(b.T), v(b.gg), v(b.ff), v(b.D)};
}

// ----------------------------------------------------------------- kernel

namespace {

Eigen::SparseMatrix<Complex, Eigen::RowMajor> to_sparse(const Matrix& m) {
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> s = m.sparseView(Complex{1.0, 0.0}, 1e-300);
  s.makeCompressed();
  return s;
}

}  // namespace

LindbladKernel::LindbladKernel(const CompiledModel& model, const ControlLaw& law)
    : dim_(model.layout->total_dim()),
      laser1_base_(model.spec.omega0 * kSqrt1_2),
      K1_(law.K1),
      K2_(law.K2),
      target_(model.basis.S.amplitudes()),
      repel_(model.basis.gg.amplitudes()),
      max_amplitude_(law.max_amplitude) {
  const auto n = static_cast<Eigen::Index>(dim_);
  // Constant-coefficient drives are folded into the static part.
  Matrix h = model.h_static.matrix();
  for (const auto& d : model.drives) {
    if (d.coeff.frequency == 0.0) {
      h += d.coeff.amplitude * d.op.matrix() + std::conj(d.coeff.amplitude) * d.op.matrix().adjoint();
    } else {
      terms_.push_back({to_sparse(d.op.matrix()), to_sparse(d.op.matrix().adjoint()), d.coeff, -1});
    }
  }
  h_static_ = to_sparse(h);
  for (const auto& c : law.terms) {
    Term term{to_sparse(c.op.matrix()), to_sparse(c.op.matrix().adjoint()), c.coeff, c.channel};
    terms_.push_back(term);
    if (c.channel == 0) laser1_.push_back(term);
  }
  Matrix g = Matrix::Zero(n, n);
  for (const auto& ch : model.channels) {
    const Matrix& l = ch.op.matrix();
    const Matrix ld = l.adjoint();
    if (ch.kind == ChannelKind::standard) {
      g += ld * l;
    } else {
      g += (ch.n + 1.0) * (ld * l) + ch.n * (l * ld);
    }
    Channel c{to_sparse(l), to_sparse(ld), {}, {}, ch.kind, ch.n, ch.m};
    if (ch.kind == ChannelKind::squeezed_reservoir) {
      c.ll = to_sparse(l * l);
      c.ll_dag = to_sparse(ld * ld);
    }
    channels_.push_back(std::move(c));
  }
  anticomm_ = to_sparse(g);
}

void LindbladKernel::apply_hamiltonian(double t, const Matrix& rho, const ControlSignal& signal,
                                       Matrix& h_rho) const {
  h_rho.noalias() = h_static_ * rho;
  for (const auto& term : terms_) {
    Complex c = term.coeff(t);
    if (term.channel == 0) c *= signal.xi1;
    if (term.channel == 1) c *= signal.xi2;
    if (c == Complex{}) continue;
    h_rho.noalias() += c * (term.op * rho);
    h_rho.noalias() += std::conj(c) * (term.op_dag * rho);
  }
}

void LindbladKernel::apply_error_hamiltonian(double t, const Matrix& x, const ControlSignal& signal,
                                             Matrix& out) const {
  const double omega1 = laser1_base_ + signal.xi1;
  out.setZero(x.rows(), x.cols());
  for (const auto& term : laser1_) {
    const Complex c = term.coeff(t) * omega1;
    out.noalias() += c * (term.op * x);
    out.noalias() += std::conj(c) * (term.op_dag * x);
  }
}

ControlEvaluation LindbladKernel::controls(double t, const Matrix& rho) const {
  ControlEvaluation out;
  if (K1_ == 0.0 && K2_ == 0.0) return out;
  // Tr{[|s><s|, H] rho} = <s|H rho|s> - <s|rho H|s>
  auto bracket = [&](int channel, const Vector& s) {
    Vector u = Vector::Zero(s.size());
    for (const auto& term : terms_) {
      if (term.channel != channel) continue;
      const Complex c = term.coeff(t);
      u.noalias() += c * (term.op * s);
      u.noalias() += std::conj(c) * (term.op_dag * s);
    }
    return u.dot(rho * s) - s.dot(rho * u);
  };
  const Complex xi1 = K1_ == 0.0 ? Complex{} : -kI * K1_ * bracket(0, target_);
  const Complex xi2 = K2_ == 0.0 ? Complex{} : kI * K2_ * bracket(1, repel_);
  out.signal = {xi1.real(), xi2.real()};
  out.imag_residue = std::max(std::abs(xi1.imag()), std::abs(xi2.imag()));
  out.hermiticity_flag = out.imag_residue > 1e-8 * std::max({K1_, K2_, 1.0});
  if (!std::isfinite(out.signal.xi1) || !std::isfinite(out.signal.xi2))
    throw ControlError("non-finite control signal: integrator state corrupted");
  if (max_amplitude_) {
    out.signal.xi1 = std::clamp(out.signal.xi1, -*max_amplitude_, *max_amplitude_);
    out.signal.xi2 = std::clamp(out.signal.xi2, -*max_amplitude_, *max_amplitude_);
  }
  return out;
}

void LindbladKernel::rhs(double t, const Matrix& rho_in, const ControlSignal& signal, const NoiseSpec* noise,
                         Matrix& out) const {
  // The shortcuts below assume rho = rho^dag; on the squeezed-reservoir terms an
  // anti-Hermitian roundoff component would otherwise grow.
  const Matrix herm = 0.5 * (rho_in + rho_in.adjoint());
  const Matrix& rho = herm;
  Matrix work(rho.rows(), rho.cols());
  apply_hamiltonian(t, rho, signal, work);
  // -i[H, rho] = -i (H rho - (H rho)^dag) for Hermitian rho
  out.noalias() = -kI * work;
  out.noalias() += -kI * (-work.adjoint());

  Matrix x(rho.rows(), rho.cols());
  for (const auto& ch : channels_) {
    if (ch.kind == ChannelKind::standard) {
      x.noalias() = ch.op * rho;                     // L rho
      out.noalias() += ch.op * x.adjoint();          // L rho L^dag
      continue;
    }
    x.noalias() = ch.op * rho;
    out.noalias() += (ch.n + 1.0) * (ch.op * x.adjoint());
    x.noalias() = ch.op_dag * rho;                   // L^dag rho
    out.noalias() += ch.n * (ch.op_dag * x.adjoint());
    if (ch.m == Complex{}) continue;
    // Y = M (L rho L - 1/2 (L L rho + rho L L));  contributes -(Y + Y^dag)
    Matrix y = ch.op * Matrix(x.adjoint());          // L rho L
    Matrix llr = ch.ll * rho;
    Matrix rll = (ch.ll_dag * rho).adjoint();
    y -= 0.5 * (llr + rll);
    y *= ch.m;
    out -= y;
    out -= y.adjoint();
  }
  x.noalias() = anticomm_ * rho;
  out.noalias() -= 0.5 * x;
  out.noalias() -= 0.5 * x.adjoint();

  if (noise && (noise->lambda != 0.0 || noise->eta != 0.0)) {
    apply_error_hamiltonian(t, rho, signal, work);  // H_e rho
    const Matrix c1 = work - work.adjoint();          // [H_e, rho], anti-Hermitian
    out.noalias() += (-kI * noise->lambda) * c1;
    apply_error_hamiltonian(t, c1, signal, x);        // H_e C
    // [H_e, C] = H_e C + (H_e C)^dag since C^dag = -C
    out.noalias() -= 0.5 * noise->eta * noise->eta * x;
    out.noalias() -= 0.5 * noise->eta * noise->eta * x.adjoint();
  }
}

// ------------------------------------------------------------- integrator

std::vector<double> Trajectory::times() const { return series(&TrajectoryPoint::t); }

std::vector<double> Trajectory::series(double TrajectoryPoint::*field) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.*field);
  return out;
}

namespace {

struct Audit {
  double trace_drift;
  double herm;
  double min_eig;
};

Audit audit_state(const Matrix& rho) {
  Audit a{};
  a.trace_drift = std::abs(rho.trace() - Complex{1.0, 0.0});
  a.herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  a.min_eig = es.eigenvalues().minCoeff();
  return a;
}

double population(const Vector& k, const Matrix& rho) { return std::clamp(k.dot(rho * k).real(), 0.0, 1.0); }
double speed(const Vector& k, const Matrix& d) { return k.dot(d * k).real(); }

}  // namespace

Trajectory integrate_closed_loop(const CompiledModel& model, const ControlLaw& law, const DensityMatrix& rho0,
                                 const IntegratorConfig& cfg, const std::optional<NoiseSpec>& noise) {
  cfg.validate(model);
  require_same_layout(model.layout, rho0.layout_ptr(), "integrate_closed_loop");
  if (noise) noise->validate();
  const bool noisy = noise && (noise->lambda != 0.0 || noise->eta != 0.0);
  const NoiseSpec* np = noisy ? &*noise : nullptr;

  const LindbladKernel kernel(model, law);
  const auto steps = cfg.steps();
  const double dt = cfg.dt;
  const auto n = rho0.matrix().rows();

  Trajectory traj;
  traj.metadata.noisy = noisy;
  traj.metadata.warnings = model.warnings;
  traj.metadata.min_eigenvalue = 1.0;
  traj.record_interval = dt * static_cast<double>(cfg.record_stride);
  traj.points.reserve(steps / cfg.record_stride + 2);

  const auto& b = model.basis;
  const Vector vS = b.S.amplitudes(), vT = b.T.amplitudes(), vG = b.gg.amplitudes(), vF = b.ff.amplitudes(),
               vD = b.D.amplitudes();

  Matrix rho = rho0.matrix();
  Matrix rho_n = noisy ? rho : Matrix();
  Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n);
  Matrix k1n, k2n, k3n, k4n;
  if (noisy) {
    k1n.resize(n, n);
    k2n.resize(n, n);
    k3n.resize(n, n);
    k4n.resize(n, n);
  }

  auto check_and_fix = [&](Matrix& r, double t, const char* which) {
    const Audit a = audit_state(r);
    auto& md = traj.metadata;
    md.max_trace_drift = std::max(md.max_trace_drift, a.trace_drift);
    md.max_hermiticity_deviation = std::max(md.max_hermiticity_deviation, a.herm);
    md.min_eigenvalue = std::min(md.min_eigenvalue, a.min_eig);
    if (a.trace_drift > 1e-6 || a.min_eig < -1e-6 || !r.allFinite()) {
      std::ostringstream os;
      os << "audit failure (" << which << " state) at t = " << t << ": trace drift " << a.trace_drift
         << ", min eigenvalue " << a.min_eig;
      throw IntegratorError(os.str());
    }
    if (a.trace_drift > 1e-9) {
      r /= r.trace().real();
      ++md.renormalizations;
      std::ostringstream os;
      os << "renormalized " << which << " state at t = " << t << " (trace drift " << a.trace_drift << ")";
      md.warnings.push_back(os.str());
    }
  };

  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * dt;
    const bool last = i == steps;

    if (i % cfg.audit_stride == 0 || last) {
      check_and_fix(rho, t, "nominal");
      if (noisy) check_and_fix(rho_n, t, "noisy");
    }

    const auto ev1 = kernel.controls(t, rho);
    traj.metadata.max_imag_residue = std::max(traj.metadata.max_imag_residue, ev1.imag_residue);
    kernel.rhs(t, rho, ev1.signal, nullptr, k1);
    if (noisy) kernel.rhs(t, rho_n, ev1.signal, np, k1n);
    if (!k1.allFinite()) throw IntegratorError("non-finite right-hand side (step-size failure)");

    if (i % cfg.record_stride == 0 || last) {
      const Matrix& r = noisy ? rho_n : rho;
      const Matrix& d = noisy ? k1n : k1;
      TrajectoryPoint p;
      p.t = t;
      p.P_S = population(vS, r);
      p.P_T = population(vT, r);
      p.P_gg = population(vG, r);
      p.P_ff = population(vF, r);
      p.P_D = population(vD, r);
      p.controls = ev1.signal;
      p.v = Speeds{speed(vS, d), speed(vT, d), speed(vG, d), speed(vF, d), speed(vD, d)};
      p.fidelity = std::sqrt(p.P_S);
      p.nominal_P_S = noisy ? population(vS, rho) : p.P_S;
      traj.points.push_back(p);
      if (cfg.store_states) traj.states.emplace_back(model.layout, r);
    }
    if (last) break;

    stage = rho + (0.5 * dt) * k1;
    const auto ev2 = kernel.controls(t + 0.5 * dt, stage);
    kernel.rhs(t + 0.5 * dt, stage, ev2.signal, nullptr, k2);
    if (noisy) {
      stage = rho_n + (0.5 * dt) * k1n;
      kernel.rhs(t + 0.5 * dt, stage, ev2.signal, np, k2n);
    }

    stage = rho + (0.5 * dt) * k2;
    const auto ev3 = kernel.controls(t + 0.5 * dt, stage);
    kernel.rhs(t + 0.5 * dt, stage, ev3.signal, nullptr, k3);
    if (noisy) {
      stage = rho_n + (0.5 * dt) * k2n;
      kernel.rhs(t + 0.5 * dt, stage, ev3.signal, np, k3n);
    }

    stage = rho + dt * k3;
    const auto ev4 = kernel.controls(t + dt, stage);
    kernel.rhs(t + dt, stage, ev4.signal, nullptr, k4);
    if (noisy) {
      stage = rho_n + dt * k3n;
      kernel.rhs(t + dt, stage, ev4.signal, np, k4n);
    }

    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (noisy) rho_n += (dt / 6.0) * (k1n + 2.0 * k2n + 2.0 * k3n + k4n);
  }

  traj.final_state.emplace(model.layout, rho);
  if (noisy) traj.final_noisy_state.emplace(model.layout, rho_n);
  return traj;
}

}  // namespace adb
