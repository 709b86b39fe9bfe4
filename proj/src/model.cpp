#include "adbsim/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace adb {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

Operator on_atom(int atom, Level to, Level from, const LayoutPtr& layout) {
  return embed(atomic_transition(to, from), layout, atom == 1 ? "atom1" : "atom2");
}

void require_two_atoms(const LayoutPtr& layout) {
  const auto& f = layout->factors();
  const bool ok = (f.size() == 2 || f.size() == 3) && f[0].label == "atom1" && f[0].dim == 3 &&
                  f[1].label == "atom2" && f[1].dim == 3 && (f.size() == 2 || f[2].label == "mode");
  if (!ok) throw LayoutError("layout is not atom1(3) x atom2(3) [x mode]");
}

Vector two_atom_state(std::initializer_list<std::pair<std::pair<Level, Level>, double>> terms) {
  Vector v = Vector::Zero(9);
  for (const auto& [levels, amp] : terms)
    v(static_cast<Eigen::Index>(3 * static_cast<std::size_t>(levels.first) + static_cast<std::size_t>(levels.second))) += amp;
  return v;
}

std::vector<DissipatorChannel> atomic_decays(const ModelSpec& spec, const LayoutPtr& layout) {
  const double amp = std::sqrt(spec.gamma / 2.0);
  std::vector<DissipatorChannel> out;
  for (int j : {1, 2})
    for (Level z : {Level::f, Level::g}) {
      std::string name = "atom" + std::to_string(j) + (z == Level::f ? "_e_to_f" : "_e_to_g");
      out.push_back(DissipatorChannel::standard(std::move(name), on_atom(j, z, Level::e, layout) * amp));
    }
  return out;
}

Operator embedded_mode_annihilation(const LayoutPtr& layout) {
  return embed(annihilation(layout->dim_of("mode") - 1), layout, "mode");
}

}  // namespace

void ModelSpec::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelError(std::string(name) + " must be finite and >= 0");
  };
  if (!(g > 0.0)) throw ModelError("g must be > 0");
  nonneg(kappa, "kappa");
  nonneg(gamma, "gamma");
  nonneg(omega0, "omega0");
  nonneg(omega0_mw, "omega0_mw");
  nonneg(K1, "K1");
  nonneg(K2, "K2");
  nonneg(r_p, "r_p");
  nonneg(r_e, "r_e");
  if (!std::isfinite(delta) || !std::isfinite(theta_p) || !std::isfinite(theta_e))
    throw ModelError("delta and phases must be finite");
  if (fock_cutoff == 0) throw ModelError("fock_cutoff must be >= 1");
  if (delta_c && !(*delta_c > 0.0)) throw ModelError("delta_c must be > 0");
}

ModelSpec reference_spec(double r_p, double K1, double K2) {
  ModelSpec s;
  s.g = 1.0;
  s.gamma = 1.0 / 3.0;  // g^2/(kappa gamma) = 30 with kappa = 0.3 gamma
  s.kappa = 0.3 * s.gamma;
  s.r_p = r_p;
  s.r_e = r_p;
  s.theta_p = 0.0;
  s.theta_e = std::numbers::pi;
  s.omega0 = 0.1 * s.g_sc();
  s.omega0_mw = 0.2 * s.omega0;
  s.delta = 0.4 * s.omega0;
  s.K1 = K1;
  s.K2 = K2;
  s.fock_cutoff = 5;
  return s;
}

SqueezingParameters squeezing_parameters(double omega_p, double delta_c) {
  if (delta_c == 0.0) throw ModelError("delta_c must be nonzero");
  const double alpha = 2.0 * omega_p / delta_c;
  if (!(std::abs(alpha) < 1.0)) {
    std::ostringstream os;
    os << "pump above threshold: |2 Omega_p / Delta_c| = " << std::abs(alpha) << " >= 1";
    throw ModelError(os.str());
  }
  SqueezingParameters p;
  p.alpha = alpha;
  p.r_p = 0.25 * std::log((1.0 + alpha) / (1.0 - alpha));
  p.omega_sc = delta_c * std::sqrt(1.0 - alpha * alpha);
  return p;
}

double pump_for_squeezing(double r_p, double delta_c) { return 0.5 * std::tanh(2.0 * r_p) * delta_c; }

Operator bogoliubov(const Operator& a, double r_p, double theta_p) {
  return a * Complex{std::cosh(r_p), 0.0} + dagger(a) * (std::exp(-kI * theta_p) * std::sinh(r_p));
}

ReservoirCoefficients reservoir_coeffs(double r_p, double theta_p, double r_e, double theta_e) {
  const double cp = std::cosh(r_p), sp = std::sinh(r_p);
  const double ce = std::cosh(r_e), se = std::sinh(r_e);
  const double sum = theta_p + theta_e;
  ReservoirCoefficients out;
  out.n = cp * cp * se * se + sp * sp * ce * ce + 0.5 * std::sinh(2.0 * r_p) * std::sinh(2.0 * r_e) * std::cos(sum);
  out.m = std::exp(kI * theta_p) * (sp * ce + std::exp(-kI * sum) * cp * se) * (cp * ce + std::exp(kI * sum) * sp * se);
  return out;
}

DissipatorChannel DissipatorChannel::standard(std::string name, Operator op) {
  return DissipatorChannel{std::move(name), ChannelKind::standard, std::move(op), 0.0, Complex{}};
}

DissipatorChannel DissipatorChannel::squeezed(std::string name, Operator op, double n, Complex m) {
  if (n < 0.0) throw ModelError("reservoir occupation must be >= 0");
  if (std::abs(m) > std::sqrt(n * (n + 1.0)) + 1e-9) throw ModelError("unphysical reservoir: |M| > sqrt(N(N+1))");
  return DissipatorChannel{std::move(name), ChannelKind::squeezed_reservoir, std::move(op), n, m};
}

std::string to_string(ModelTier tier) {
  switch (tier) {
    case ModelTier::effective: return "effective";
    case ModelTier::full_squeezed: return "full_squeezed";
    case ModelTier::lab_frame: return "lab_frame";
  }
  return "unknown";
}

ModelTier tier_from_string(const std::string& name) {
  if (name == "effective") return ModelTier::effective;
  if (name == "full_squeezed" || name == "full") return ModelTier::full_squeezed;
  if (name == "lab_frame" || name == "lab") return ModelTier::lab_frame;
  throw ModelError("unknown model tier '" + name + "'");
}

// ---------------------------------------------------------- CompiledModel

Operator CompiledModel::hamiltonian(double t, const ControlSignal& signal) const {
  Matrix h = h_static.matrix();
  for (const auto& d : drives) {
    const Complex c = d.coeff(t);
    h += c * d.op.matrix() + std::conj(c) * d.op.matrix().adjoint();
  }
  for (const auto& c : controls) {
    const double xi = c.channel == 0 ? signal.xi1 : signal.xi2;
    if (xi == 0.0) continue;
    const Complex v = c.coeff(t) * xi;
    h += v * c.op.matrix() + std::conj(v) * c.op.matrix().adjoint();
  }
  return {layout, std::move(h)};
}

Operator CompiledModel::control_hamiltonian(int channel, double t) const {
  Matrix h = Matrix::Zero(h_static.matrix().rows(), h_static.matrix().cols());
  for (const auto& c : controls) {
    if (c.channel != channel) continue;
    const Complex v = c.coeff(t);
    h += v * c.op.matrix() + std::conj(v) * c.op.matrix().adjoint();
  }
  return {layout, std::move(h)};
}

double CompiledModel::fastest_frequency() const {
  const auto& s = spec;
  double w = std::max({s.omega0, kSqrt2 * s.omega0_mw, std::abs(s.delta), s.gamma, s.kappa});
  if (tier != ModelTier::effective) w = std::max({w, s.g_sc(), s.g});
  if (tier == ModelTier::lab_frame && s.delta_c) {
    const double omega_p = pump_for_squeezing(s.r_p, *s.delta_c);
    w = std::max({w, *s.delta_c, 2.0 * omega_p});
  }
  return w;
}

// -------------------------------------------------------------- builders

LayoutPtr effective_layout() { return make_layout({{"effective", 5}}); }

BellBasis effective_basis(const LayoutPtr& layout) {
  if (layout->total_dim() != 5 || layout->factors().size() != 1) throw LayoutError("not an effective-tier layout");
  return BellBasis{Ket::basis(layout, 2), Ket::basis(layout, 1), Ket::basis(layout, 4), Ket::basis(layout, 0),
                   Ket::basis(layout, 3)};
}

BellBasis bell_basis(const LayoutPtr& layout, const std::optional<Ket>& mode_state) {
  require_two_atoms(layout);
  const bool has_mode = layout->factors().size() == 3;
  Vector mode;
  if (has_mode) {
    const auto mdim = static_cast<Eigen::Index>(layout->dim_of("mode"));
    if (mode_state) {
      if (mode_state->amplitudes().size() != mdim) throw LayoutError("mode state dimension mismatch");
      mode = mode_state->amplitudes();
    } else {
      mode = Vector::Zero(mdim);
      mode(0) = 1.0;
    }
  }
  auto lift = [&](const Vector& atoms) {
    if (!has_mode) return Ket(layout, atoms);
    Vector v(atoms.size() * mode.size());
    for (Eigen::Index i = 0; i < atoms.size(); ++i) v.segment(i * mode.size(), mode.size()) = atoms(i) * mode;
    return Ket(layout, std::move(v));
  };
  const double h = 1.0 / kSqrt2;
  using L = Level;
  return BellBasis{
      lift(two_atom_state({{{L::f, L::g}, h}, {{L::g, L::f}, -h}})),
      lift(two_atom_state({{{L::f, L::g}, h}, {{L::g, L::f}, h}})),
      lift(two_atom_state({{{L::e, L::g}, h}, {{L::g, L::e}, -h}})),
      lift(two_atom_state({{{L::g, L::g}, 1.0}})),
      lift(two_atom_state({{{L::f, L::f}, 1.0}})),
  };
}

Operator atomic_projector(const LayoutPtr& layout, const Vector& atomic_state) {
  require_two_atoms(layout);
  if (atomic_state.size() != 9) throw LayoutError("atomic state must have dimension 9");
  const Matrix p = atomic_state * atomic_state.adjoint();
  if (layout->factors().size() == 2) return {layout, p};
  const auto mdim = static_cast<Eigen::Index>(layout->dim_of("mode"));
  Matrix out = Matrix::Zero(9 * mdim, 9 * mdim);
  for (Eigen::Index i = 0; i < 9; ++i)
    for (Eigen::Index j = 0; j < 9; ++j)
      if (p(i, j) != Complex{}) out.block(i * mdim, j * mdim, mdim, mdim) = p(i, j) * Matrix::Identity(mdim, mdim);
  return {layout, std::move(out)};
}

Ket squeezed_vacuum_ket(double r, std::size_t cutoff, double theta) {
  if (cutoff == 0) throw LayoutError("squeezed vacuum needs cutoff >= 1");
  if (r < 0.0) throw ModelError("squeezing parameter must be >= 0");
  auto layout = make_layout({{"mode", cutoff + 1}});
  Vector v = Vector::Zero(static_cast<Eigen::Index>(cutoff + 1));
  const Complex ratio = -std::tanh(r) * std::exp(-kI * theta);
  Complex c = 1.0 / std::sqrt(std::cosh(r));
  for (std::size_t n = 0; 2 * n <= cutoff; ++n) {
    v(static_cast<Eigen::Index>(2 * n)) = c;
    c *= ratio * std::sqrt((2.0 * n + 1.0) / (2.0 * n + 2.0));
  }
  const double norm = v.norm();
  if (norm < 0.999) {
    std::ostringstream os;
    os << "fock cutoff " << cutoff << " too small for squeezed vacuum r = " << r << " (truncated norm " << norm << ")";
    throw ModelError(os.str());
  }
  return Ket(std::move(layout), v / norm);
}

CompiledModel build_squeezed_frame_model(const ModelSpec& spec) {
  spec.validate();
  auto layout = two_atom_layout(spec.fock_cutoff);
  const Operator a = embedded_mode_annihilation(layout);
  const double gsc = spec.g_sc();

  Operator h = Operator::zero(layout);
  for (int j : {1, 2}) {
    const Operator c = on_atom(j, Level::e, Level::g, layout) * a;
    h = h + (c + dagger(c)) * Complex{gsc, 0.0};
  }

  std::vector<DriveTerm> drives;
  const double laser = spec.omega0 / kSqrt2;
  const double mw = spec.omega0_mw;  // projects to sqrt2 * omega0_mw on gg<->T
  drives.push_back({"laser1", on_atom(1, Level::e, Level::f, layout), {laser, 0.0}});
  drives.push_back({"laser2", on_atom(2, Level::e, Level::f, layout), {-laser, 0.0}});
  drives.push_back({"mw1", on_atom(1, Level::f, Level::g, layout), {mw, -spec.delta}});
  drives.push_back({"mw2", on_atom(2, Level::f, Level::g, layout), {mw, -spec.delta}});

  std::vector<ControlTerm> controls;
  controls.push_back({0, on_atom(1, Level::f, Level::e, layout), {1.0, 0.0}});
  controls.push_back({1, on_atom(1, Level::f, Level::g, layout), {1.0, -spec.delta}});

  std::vector<DissipatorChannel> channels;
  channels.push_back(DissipatorChannel::standard("cavity", a * Complex{std::sqrt(spec.kappa), 0.0}));
  for (auto& c : atomic_decays(spec, layout)) channels.push_back(std::move(c));

  std::vector<std::string> warnings;
  if (spec.omega0 > 0.2 * gsc) warnings.emplace_back("regime: Omega0 > 0.2 g_sc, effective-subspace picture degrades");

  auto basis = bell_basis(layout);
  auto vac = Ket::basis(make_layout({{"mode", spec.fock_cutoff + 1}}), 0);
  return CompiledModel{ModelTier::full_squeezed, spec,   layout, std::move(h), std::move(drives), std::move(controls),
                       std::move(channels),     std::move(basis), std::move(vac), std::move(warnings)};
}

CompiledModel build_lab_frame_model(const ModelSpec& spec) {
  spec.validate();
  if (!spec.delta_c) throw ModelError("lab-frame tier requires delta_c");
  const double delta_c = *spec.delta_c;
  const double omega_p = pump_for_squeezing(spec.r_p, delta_c);
  const auto sq = squeezing_parameters(omega_p, delta_c);
  const double delta_e = sq.omega_sc;

  auto layout = two_atom_layout(spec.fock_cutoff);
  const Operator a = embedded_mode_annihilation(layout);
  const Operator ad = dagger(a);

  Operator h = (ad * a) * Complex{delta_c, 0.0};
  const Operator a2 = a * a;
  h = h + a2 * (omega_p * std::exp(kI * spec.theta_p)) + dagger(a2) * (omega_p * std::exp(-kI * spec.theta_p));
  for (int j : {1, 2}) {
    h = h + on_atom(j, Level::e, Level::e, layout) * Complex{delta_e, 0.0};
    const Operator c = on_atom(j, Level::e, Level::g, layout) * a;
    h = h + (c + dagger(c)) * Complex{spec.g, 0.0};
  }

  std::vector<DriveTerm> drives;
  const double laser = spec.omega0 / kSqrt2;
  const double mw = spec.omega0_mw;  // projects to sqrt2 * omega0_mw on gg<->T
  drives.push_back({"laser1", on_atom(1, Level::e, Level::f, layout), {laser, -delta_e}});
  drives.push_back({"laser2", on_atom(2, Level::e, Level::f, layout), {-laser, -delta_e}});
  drives.push_back({"mw1", on_atom(1, Level::f, Level::g, layout), {mw, -spec.delta}});
  drives.push_back({"mw2", on_atom(2, Level::f, Level::g, layout), {mw, -spec.delta}});

  std::vector<ControlTerm> controls;
  controls.push_back({0, on_atom(1, Level::e, Level::f, layout), {1.0, -delta_e}});
  controls.push_back({1, on_atom(1, Level::f, Level::g, layout), {1.0, -spec.delta}});

  std::vector<DissipatorChannel> channels = atomic_decays(spec, layout);
  const double se = std::sinh(spec.r_e), ce = std::cosh(spec.r_e);
  channels.push_back(DissipatorChannel::squeezed("cavity", a * Complex{std::sqrt(spec.kappa), 0.0}, se * se,
                                                 ce * se * std::exp(-kI * spec.theta_e)));

  std::vector<std::string> warnings;
  if (spec.g * std::sinh(spec.r_p) >= 0.1 * (sq.omega_sc + delta_e))
    warnings.emplace_back("regime: g sinh(r_p) not << omega_sc + Delta_e, counter-rotating coupling not negligible");
  if (spec.omega0 > 0.2 * spec.g_sc()) warnings.emplace_back("regime: Omega0 > 0.2 g_sc");

  auto vac = squeezed_vacuum_ket(spec.r_p, spec.fock_cutoff, spec.theta_p);
  auto basis = bell_basis(layout, vac);
  return CompiledModel{ModelTier::lab_frame,  spec,   layout, std::move(h), std::move(drives), std::move(controls),
                       std::move(channels), std::move(basis), std::move(vac), std::move(warnings)};
}

CompiledModel build_effective_model(const ModelSpec& spec) {
  spec.validate();
  auto layout = effective_layout();
  auto basis = effective_basis(layout);
  auto op = [&](const Ket& to, const Ket& from) { return outer(to, from); };
  const auto& [S, T, D, gg, ff] = basis;

  std::vector<DriveTerm> drives;
  drives.push_back({"laser", op(D, T), {spec.omega0 / kSqrt2, 0.0}});
  drives.push_back({"mw_gg", op(gg, T), {kSqrt2 * spec.omega0_mw, spec.delta}});
  drives.push_back({"mw_ff", op(ff, T), {kSqrt2 * spec.omega0_mw, -spec.delta}});

  // Xi1 weight is the projection of |e>_1<f| onto D<-T and D<-S.
  const Complex h{1.0 / kSqrt2, 0.0};
  std::vector<ControlTerm> controls;
  controls.push_back({0, (op(D, T) + op(D, S)) * Complex{0.5, 0.0}, {1.0, 0.0}});
  controls.push_back({1, (op(gg, T) + op(gg, S)) * h, {1.0, spec.delta}});
  controls.push_back({1, (op(ff, T) - op(ff, S)) * h, {1.0, -spec.delta}});

  std::vector<DissipatorChannel> channels;
  channels.push_back(DissipatorChannel::standard("L_G", op(gg, D) * Complex{std::sqrt(spec.gamma / 2.0), 0.0}));
  channels.push_back(DissipatorChannel::standard("L_T", op(T, D) * Complex{std::sqrt(spec.gamma / 4.0), 0.0}));
  channels.push_back(DissipatorChannel::standard("L_S", op(S, D) * Complex{std::sqrt(spec.gamma / 4.0), 0.0}));

  std::vector<std::string> warnings;
  if (spec.omega0 > 0.2 * spec.g_sc()) warnings.emplace_back("regime: Omega0 > 0.2 g_sc");

  return CompiledModel{ModelTier::effective, spec, layout, Operator::zero(layout), std::move(drives), std::move(controls),
                       std::move(channels), std::move(basis), std::nullopt, std::move(warnings)};
}

CompiledModel build_model(ModelTier tier, const ModelSpec& spec) {
  switch (tier) {
    case ModelTier::effective: return build_effective_model(spec);
    case ModelTier::full_squeezed: return build_squeezed_frame_model(spec);
    case ModelTier::lab_frame: return build_lab_frame_model(spec);
  }
  throw ModelError("unknown tier");
}

}  // namespace adb
