#pragma once

// Dense complex linear algebra over a composite Hilbert space
// (atom1 (x) atom2 (x) truncated mode, or the 5-state effective space).

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace adb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when operands live on different layouts or an index is invalid.
class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Factor {
  std::string label;
  std::size_t dim = 1;
  bool operator==(const Factor&) const = default;
};

/// Ordered tensor factorization. Kronecker order follows the factor order,
/// so the first factor is the slowest-varying index.
class HilbertLayout {
 public:
  explicit HilbertLayout(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t factor_index(std::string_view label) const;
  std::size_t dim_of(std::string_view label) const;
  bool has_factor(std::string_view label) const;

  /// Flat index of a product basis state; levels given in factor order.
  std::size_t flat_index(const std::vector<std::size_t>& levels) const;

  bool operator==(const HilbertLayout& other) const { return factors_ == other.factors_; }

 private:
  std::vector<Factor> factors_;
  std::size_t total_dim_ = 1;
};

using LayoutPtr = std::shared_ptr<const HilbertLayout>;

LayoutPtr make_layout(std::vector<Factor> factors);

/// atom1 (x) atom2 (x) mode with dims (3, 3, cutoff + 1).
LayoutPtr two_atom_layout(std::size_t fock_cutoff);
/// atom1 (x) atom2 without a mode factor.
LayoutPtr two_atom_layout_no_mode();

bool same_layout(const LayoutPtr& a, const LayoutPtr& b);
void require_same_layout(const LayoutPtr& a, const LayoutPtr& b, std::string_view what);

class Operator {
 public:
  Operator(LayoutPtr layout, Matrix matrix);

  static Operator identity(LayoutPtr layout);
  static Operator zero(LayoutPtr layout);

  const HilbertLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

  /// Max elementwise |A - A^dagger|.
  double hermiticity_deviation() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_deviation() <= tol; }

  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(const Operator& rhs) const;
  Operator operator*(Complex s) const;
  friend Operator operator*(Complex s, const Operator& op) { return op * s; }

 private:
  LayoutPtr layout_;
  Matrix matrix_;
};

class Ket {
 public:
  Ket(LayoutPtr layout, Vector amplitudes);

  /// Computational basis state at flat index.
  static Ket basis(LayoutPtr layout, std::size_t index);
  /// Product state, one level per factor in layout order.
  static Ket product(LayoutPtr layout, const std::vector<std::size_t>& levels);

  const HilbertLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  const Vector& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }
  Ket normalized() const;

  Ket operator+(const Ket& rhs) const;
  Ket operator-(const Ket& rhs) const;
  Ket operator*(Complex s) const;
  friend Ket operator*(Complex s, const Ket& k) { return k * s; }

  Complex inner(const Ket& other) const;  // <this|other>

 private:
  LayoutPtr layout_;
  Vector amplitudes_;
};

struct StateAudit {
  double hermiticity_deviation = 0.0;
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
};

class DensityMatrix {
 public:
  DensityMatrix(LayoutPtr layout, Matrix matrix);

  static DensityMatrix pure(const Ket& ket);
  /// Uniform mixture of the given (orthonormal) kets.
  static DensityMatrix mixture(const std::vector<Ket>& kets);

  const HilbertLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

  StateAudit audit() const;
  /// Hermitian within 1e-10, unit trace within 1e-8, min eigenvalue >= -1e-8.
  bool is_valid() const;

 private:
  LayoutPtr layout_;
  Matrix matrix_;
};

/// Truncated annihilation operator on a single factor labelled "mode",
/// Fock states |0>..|cutoff>.
Operator annihilation(std::size_t cutoff);

/// Atomic level convention: f = 0, g = 1, e = 2.
enum class Level : std::size_t { f = 0, g = 1, e = 2 };

/// |to><from| on a single three-level factor labelled "atom".
Operator atomic_transition(Level to, Level from);

/// op acting on factor `label`, identity elsewhere.
Operator embed(const Operator& op, const LayoutPtr& layout, std::string_view label);

Operator dagger(const Operator& a);
Operator commutator(const Operator& a, const Operator& b);
Operator outer(const Ket& k1, const Ket& k2);
Complex trace(const Operator& a);
/// Tr(rho A).
Complex expectation(const DensityMatrix& rho, const Operator& a);
/// <x|rho|x> for each ket, clamped to [0, 1].
std::vector<double> partial_populations(const DensityMatrix& rho, const std::vector<Ket>& basis);

}  // namespace adb
