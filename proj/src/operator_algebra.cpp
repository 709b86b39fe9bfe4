#include "adbsim/operator_algebra.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

namespace adb {

HilbertLayout::HilbertLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw LayoutError("layout needs at least one factor");
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dim == 0) throw LayoutError("factor '" + f.label + "' has zero dimension");
    if (!seen.insert(f.label).second) throw LayoutError("duplicate factor label '" + f.label + "'");
    total_dim_ *= f.dim;
  }
}

std::size_t HilbertLayout::factor_index(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label == label) return i;
  throw LayoutError("unknown factor label '" + std::string(label) + "'");
}

std::size_t HilbertLayout::dim_of(std::string_view label) const { return factors_[factor_index(label)].dim; }

bool HilbertLayout::has_factor(std::string_view label) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t HilbertLayout::flat_index(const std::vector<std::size_t>& levels) const {
  if (levels.size() != factors_.size()) throw LayoutError("level count does not match factor count");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (levels[i] >= factors_[i].dim) throw LayoutError("level out of range for factor '" + factors_[i].label + "'");
    idx = idx * factors_[i].dim + levels[i];
  }
  return idx;
}

LayoutPtr make_layout(std::vector<Factor> factors) {
  return std::make_shared<const HilbertLayout>(std::move(factors));
}

LayoutPtr two_atom_layout(std::size_t fock_cutoff) {
  if (fock_cutoff == 0) throw LayoutError("fock cutoff must be >= 1");
  return make_layout({{"atom1", 3}, {"atom2", 3}, {"mode", fock_cutoff + 1}});
}

LayoutPtr two_atom_layout_no_mode() { return make_layout({{"atom1", 3}, {"atom2", 3}}); }

bool same_layout(const LayoutPtr& a, const LayoutPtr& b) { return a == b || (a && b && *a == *b); }

void require_same_layout(const LayoutPtr& a, const LayoutPtr& b, std::string_view what) {
  if (!same_layout(a, b)) throw LayoutError("layout mismatch in " + std::string(what));
}

// ---------------------------------------------------------------- Operator

Operator::Operator(LayoutPtr layout, Matrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (!layout_) throw LayoutError("operator without layout");
  const auto n = static_cast<Eigen::Index>(layout_->total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) throw LayoutError("operator matrix does not match layout dimension");
}

Operator Operator::identity(LayoutPtr layout) {
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  return {std::move(layout), Matrix::Identity(n, n)};
}

Operator Operator::zero(LayoutPtr layout) {
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  return {std::move(layout), Matrix::Zero(n, n)};
}

double Operator::hermiticity_deviation() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

Operator Operator::operator+(const Operator& rhs) const {
  require_same_layout(layout_, rhs.layout_, "operator +");
  return {layout_, matrix_ + rhs.matrix_};
}

Operator Operator::operator-(const Operator& rhs) const {
  require_same_layout(layout_, rhs.layout_, "operator -");
  return {layout_, matrix_ - rhs.matrix_};
}

Operator Operator::operator*(const Operator& rhs) const {
  require_same_layout(layout_, rhs.layout_, "operator *");
  return {layout_, matrix_ * rhs.matrix_};
}

Operator Operator::operator*(Complex s) const { return {layout_, matrix_ * s}; }

// --------------------------------------------------------------------- Ket

Ket::Ket(LayoutPtr layout, Vector amplitudes) : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (!layout_) throw LayoutError("ket without layout");
  if (amplitudes_.size() != static_cast<Eigen::Index>(layout_->total_dim()))
    throw LayoutError("ket size does not match layout dimension");
}

Ket Ket::basis(LayoutPtr layout, std::size_t index) {
  if (index >= layout->total_dim()) throw LayoutError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(layout->total_dim()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return {std::move(layout), std::move(v)};
}

Ket Ket::product(LayoutPtr layout, const std::vector<std::size_t>& levels) {
  const auto idx = layout->flat_index(levels);
  return basis(std::move(layout), idx);
}

Ket Ket::normalized() const {
  const double n = norm();
  if (n == 0.0) throw LayoutError("cannot normalize zero ket");
  return {layout_, amplitudes_ / n};
}

Ket Ket::operator+(const Ket& rhs) const {
  require_same_layout(layout_, rhs.layout_, "ket +");
  return {layout_, amplitudes_ + rhs.amplitudes_};
}

Ket Ket::operator-(const Ket& rhs) const {
  require_same_layout(layout_, rhs.layout_, "ket -");
  return {layout_, amplitudes_ - rhs.amplitudes_};
}

Ket Ket::operator*(Complex s) const { return {layout_, amplitudes_ * s}; }

Complex Ket::inner(const Ket& other) const {
  require_same_layout(layout_, other.layout_, "inner product");
  return amplitudes_.dot(other.amplitudes_);
}

// ----------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(LayoutPtr layout, Matrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (!layout_) throw LayoutError("density matrix without layout");
  const auto n = static_cast<Eigen::Index>(layout_->total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) throw LayoutError("density matrix does not match layout dimension");
}

DensityMatrix DensityMatrix::pure(const Ket& ket) {
  const Ket k = ket.normalized();
  return {k.layout_ptr(), k.amplitudes() * k.amplitudes().adjoint()};
}

DensityMatrix DensityMatrix::mixture(const std::vector<Ket>& kets) {
  if (kets.empty()) throw LayoutError("empty mixture");
  const auto& layout = kets.front().layout_ptr();
  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& k : kets) {
    require_same_layout(layout, k.layout_ptr(), "mixture");
    const Vector v = k.normalized().amplitudes();
    m += v * v.adjoint();
  }
  m /= static_cast<double>(kets.size());
  return {layout, std::move(m)};
}

StateAudit DensityMatrix::audit() const {
  StateAudit a;
  a.hermiticity_deviation = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  a.trace_deviation = std::abs(matrix_.trace() - Complex{1.0, 0.0});
  const Matrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  a.min_eigenvalue = es.eigenvalues().minCoeff();
  return a;
}

bool DensityMatrix::is_valid() const {
  const auto a = audit();
  return a.hermiticity_deviation <= 1e-10 && a.trace_deviation <= 1e-8 && a.min_eigenvalue >= -1e-8;
}

// ------------------------------------------------------------- operations

Operator annihilation(std::size_t cutoff) {
  if (cutoff == 0) throw LayoutError("annihilation operator needs cutoff >= 1");
  auto layout = make_layout({{"mode", cutoff + 1}});
  const auto n = static_cast<Eigen::Index>(cutoff + 1);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return {std::move(layout), std::move(a)};
}

Operator atomic_transition(Level to, Level from) {
  auto layout = make_layout({{"atom", 3}});
  Matrix m = Matrix::Zero(3, 3);
  m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
  return {std::move(layout), std::move(m)};
}

Operator embed(const Operator& op, const LayoutPtr& layout, std::string_view label) {
  const auto idx = layout->factor_index(label);
  const auto& factors = layout->factors();
  if (op.dim() != factors[idx].dim)
    throw LayoutError("embedded operator dimension does not match factor '" + std::string(label) + "'");
  std::size_t left = 1;
  std::size_t right = 1;
  for (std::size_t i = 0; i < idx; ++i) left *= factors[i].dim;
  for (std::size_t i = idx + 1; i < factors.size(); ++i) right *= factors[i].dim;

  const auto n = static_cast<Eigen::Index>(layout->total_dim());
  const auto d = static_cast<Eigen::Index>(op.dim());
  const auto r = static_cast<Eigen::Index>(right);
  Matrix out = Matrix::Zero(n, n);
  const Matrix& m = op.matrix();
  // I_left (x) op (x) I_right
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(left); ++l)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const Complex v = m(i, j);
        if (v == Complex{}) continue;
        for (Eigen::Index k = 0; k < r; ++k) out((l * d + i) * r + k, (l * d + j) * r + k) = v;
      }
  return {layout, std::move(out)};
}

Operator dagger(const Operator& a) { return {a.layout_ptr(), a.matrix().adjoint()}; }

Operator commutator(const Operator& a, const Operator& b) {
  require_same_layout(a.layout_ptr(), b.layout_ptr(), "commutator");
  return {a.layout_ptr(), a.matrix() * b.matrix() - b.matrix() * a.matrix()};
}

Operator outer(const Ket& k1, const Ket& k2) {
  require_same_layout(k1.layout_ptr(), k2.layout_ptr(), "outer product");
  return {k1.layout_ptr(), k1.amplitudes() * k2.amplitudes().adjoint()};
}

Complex trace(const Operator& a) { return a.matrix().trace(); }

Complex expectation(const DensityMatrix& rho, const Operator& a) {
  require_same_layout(rho.layout_ptr(), a.layout_ptr(), "expectation");
  // Tr(rho A) = sum_ij rho_ij A_ji
  return (rho.matrix().array() * a.matrix().transpose().array()).sum();
}

std::vector<double> partial_populations(const DensityMatrix& rho, const std::vector<Ket>& basis) {
  std::vector<double> out;
  out.reserve(basis.size());
  for (const auto& k : basis) {
    require_same_layout(rho.layout_ptr(), k.layout_ptr(), "partial_populations");
    const double p = k.amplitudes().dot(rho.matrix() * k.amplitudes()).real();
    out.push_back(std::clamp(p, 0.0, 1.0));
  }
  return out;
}

}  // namespace adb
