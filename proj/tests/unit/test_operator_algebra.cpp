#include "doctest.h"

#include "adbsim/operator_algebra.hpp"
#include "support.hpp"

using namespace adb;
using adb::testing::max_abs;

TEST_CASE("layout indexing follows factor order") {
  auto l = two_atom_layout(4);
  CHECK(l->total_dim() == 45);
  CHECK(l->dim_of("mode") == 5);
  CHECK(l->factor_index("atom2") == 1);
  CHECK(l->flat_index({1, 2, 3}) == 1 * 15 + 2 * 5 + 3);
  CHECK_THROWS_AS(l->flat_index({3, 0, 0}), LayoutError);
  CHECK_THROWS_AS(l->dim_of("nope"), LayoutError);
  CHECK(same_layout(two_atom_layout(4), l));
  CHECK_FALSE(same_layout(two_atom_layout(3), l));
}

TEST_CASE("annihilation operator: number operator and commutator") {
  const auto a = annihilation(6);
  const Matrix n = (dagger(a) * a).matrix();
  for (int k = 0; k <= 6; ++k) CHECK(std::abs(n(k, k) - Complex(k, 0)) < 1e-14);
  CHECK(max_abs(n - Matrix(n.diagonal().asDiagonal())) < 1e-14);
  const Matrix c = commutator(a, dagger(a)).matrix();
  // [a, a^dag] = 1 except at the truncation edge.
  for (int k = 0; k < 6; ++k) CHECK(std::abs(c(k, k) - 1.0) < 1e-14);
  CHECK(std::abs(c(6, 6) + 6.0) < 1e-14);
  CHECK_THROWS_AS(annihilation(0), LayoutError);
}

TEST_CASE("embed places the operator on the named factor") {
  auto l = two_atom_layout(2);
  const auto op = embed(atomic_transition(Level::e, Level::g), l, "atom2");
  const auto ket = Ket::product(l, {0, 1, 2});
  const Vector out = op.matrix() * ket.amplitudes();
  CHECK(std::abs(out(static_cast<Eigen::Index>(l->flat_index({0, 2, 2}))) - 1.0) < 1e-15);
  CHECK(std::abs(out.norm() - 1.0) < 1e-15);
  CHECK_THROWS_AS(embed(atomic_transition(Level::e, Level::g), two_atom_layout(4), "mode"), LayoutError);
}

TEST_CASE("mismatched layouts are rejected") {
  auto l2 = two_atom_layout(2), l3 = two_atom_layout(3);
  CHECK_THROWS_AS(Operator::identity(l2) + Operator::identity(l3), LayoutError);
  CHECK_THROWS_AS(Ket::basis(l2, 0).inner(Ket::basis(l3, 0)), LayoutError);
  CHECK_THROWS_AS(Operator(l2, Matrix::Zero(3, 3)), LayoutError);
}

TEST_CASE("Tr([A, B] C) is purely imaginary for Hermitian A, B, C") {
  std::mt19937 rng(7);
  auto l = make_layout({{"q", 6}});
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = testing::random_hermitian(l, rng);
    const auto b = testing::random_hermitian(l, rng);
    const auto c = testing::random_hermitian(l, rng);
    const Complex t = trace(commutator(a, b) * c);
    CHECK(std::abs(t.real()) < 1e-10 * (1.0 + std::abs(t)));
  }
}

TEST_CASE("density matrix audits") {
  auto l = make_layout({{"q", 3}});
  const auto k0 = Ket::basis(l, 0), k1 = Ket::basis(l, 1);
  const auto pure = DensityMatrix::pure((k0 + k1).normalized());
  CHECK(pure.is_valid());
  CHECK(std::abs(pure.audit().min_eigenvalue) < 1e-12);
  const auto mix = DensityMatrix::mixture({k0, k1});
  CHECK(mix.is_valid());
  CHECK(std::abs(expectation(mix, outer(k0, k0)) - 0.5) < 1e-15);

  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  const DensityMatrix neg(l, bad);
  CHECK_FALSE(neg.is_valid());
  CHECK(neg.audit().min_eigenvalue == doctest::Approx(-0.2));
  const auto pops = partial_populations(neg, {k0, k1});
  CHECK(pops[0] == 1.0);
  CHECK(pops[1] == 0.0);
}

TEST_CASE("atomic transitions compose") {
  const auto eg = atomic_transition(Level::e, Level::g);
  const auto ge = atomic_transition(Level::g, Level::e);
  const Matrix p = (eg * ge).matrix();
  CHECK(std::abs(p(2, 2) - 1.0) < 1e-15);
  CHECK(std::abs(p.trace() - 1.0) < 1e-15);
  CHECK(!eg.is_hermitian());
  CHECK((eg + ge).is_hermitian());
}
