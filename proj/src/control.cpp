#include "adbsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace adb {

Operator ControlLaw::control_hamiltonian(int channel, double t) const {
  Matrix h = Matrix::Zero(target_projector.matrix().rows(), target_projector.matrix().cols());
  for (const auto& c : terms) {
    if (c.channel != channel) continue;
    const Complex v = c.coeff(t);
    h += v * c.op.matrix() + std::conj(v) * c.op.matrix().adjoint();
  }
  return {target_projector.layout_ptr(), std::move(h)};
}

ControlLaw make_control_law(const CompiledModel& model) {
  return make_control_law(model, model.spec.K1, model.spec.K2);
}

ControlLaw make_control_law(const CompiledModel& model, double K1, double K2) {
  if (K1 < 0.0 || K2 < 0.0) throw ControlError("feedback gains must be >= 0");
  return ControlLaw{K1, K2, outer(model.basis.S, model.basis.S), outer(model.basis.gg, model.basis.gg), model.controls,
                    std::nullopt};
}

ControlEvaluation evaluate_controls(const ControlLaw& law, double t, const DensityMatrix& rho) {
  const auto h1 = law.control_hamiltonian(0, t);
  const auto h2 = law.control_hamiltonian(1, t);
  const Operator r(rho.layout_ptr(), rho.matrix());
  const Complex tr1 = trace(commutator(law.target_projector, h1) * r);
  const Complex tr2 = trace(commutator(law.repel_projector, h2) * r);
  const Complex xi1 = -kI * law.K1 * tr1;
  const Complex xi2 = kI * law.K2 * tr2;

  ControlEvaluation out;
  out.signal = {xi1.real(), xi2.real()};
  out.imag_residue = std::max(std::abs(xi1.imag()), std::abs(xi2.imag()));
  out.hermiticity_flag = out.imag_residue > 1e-8 * std::max({law.K1, law.K2, 1.0});
  if (!std::isfinite(out.signal.xi1) || !std::isfinite(out.signal.xi2))
    throw ControlError("non-finite control signal: integrator state corrupted");
  if (law.max_amplitude) {
    const double m = *law.max_amplitude;
    out.signal.xi1 = std::clamp(out.signal.xi1, -m, m);
    out.signal.xi2 = std::clamp(out.signal.xi2, -m, m);
  }
  return out;
}

DriveAmplitudes modulated_amplitudes(double omega0, double omega0_mw, const ControlSignal& signal) {
  const double s = 1.0 / std::numbers::sqrt2;
  return DriveAmplitudes{
      Complex{omega0 * s + signal.xi1, 0.0},
      std::exp(kI * std::numbers::pi) * (omega0 * s),
      Complex{omega0_mw * s + signal.xi2, 0.0},
      Complex{omega0_mw * s, 0.0},
  };
}

}  // namespace adb
