#include "doctest.h"

#include <cmath>
#include <random>

#include "adbsim/analysis.hpp"

using namespace adb;

namespace {

Trajectory synthetic(const std::vector<double>& vs, double h = 1.0) {
  Trajectory t;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    TrajectoryPoint p;
    p.t = h * static_cast<double>(i);
    p.v.S = vs[i];
    t.points.push_back(p);
  }
  return t;
}

RunSummary with_T(double r_p, std::optional<double> T) {
  RunSummary s;
  s.r_p = r_p;
  s.g_sc = std::cosh(r_p);
  if (T) {
    s.T = T;
    s.t_S = *T / s.g_sc;
  }
  return s;
}

}  // namespace

TEST_CASE("fidelity of pure and mixed states") {
  const auto m = build_effective_model(reference_spec(0.0, 0.0, 0.0));
  const auto& b = m.basis;
  CHECK(fidelity(DensityMatrix::pure(b.S), b.S) == doctest::Approx(1.0));
  CHECK(fidelity(DensityMatrix::mixture({b.S, b.T, b.gg, b.ff}), b.S) == doctest::Approx(0.5));
  CHECK(fidelity(DensityMatrix::pure(b.D), b.S) == 0.0);
  auto other = two_atom_layout(1);
  CHECK_THROWS_AS(fidelity(DensityMatrix::pure(b.S), bell_basis(other).S), LayoutError);
}

TEST_CASE("stabilization time needs the condition to persist") {
  // Crosses below threshold at t = 2 (an oscillation node), rises again, settles from t = 6.
  const auto traj = synthetic({1e-3, 1e-4, 1e-6, 1e-6, 1e-3, 1e-4, 5e-7, 5e-7, 5e-7, 5e-7}, 1000.0);
  const auto t = stabilization_time(traj, {1e-5, 1e-6});
  REQUIRE(t);
  CHECK(*t == 6000.0);
  CHECK_FALSE(stabilization_time(synthetic({1e-3, 1e-3, 1e-3})));
  CHECK_FALSE(stabilization_time(Trajectory{}));
  CHECK_THROWS_AS(stabilization_time(traj, {0.0, 1e-6}), AnalysisError);
}

TEST_CASE("derivative guard rejects fast-changing small speeds") {
  // V_S below threshold but changing by 2e-6 per unit time near t = 1.
  const auto traj = synthetic({-2e-6, 0.0, 2e-6, 2e-6, 2e-6});
  CHECK(*stabilization_time(traj, {1e-5, 1e-6}) == 2.0);
  CHECK(*stabilization_time(traj, {1e-5, 1e-5}) == 0.0);
}

TEST_CASE("loosening either threshold never increases t_S") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-6.5, -3.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 40; ++i) v.push_back(std::pow(10.0, u(rng)) * std::exp(-0.1 * i));
    const auto traj = synthetic(v);
    const StabilizationCriterion tight{1e-5, 1e-6};
    for (const StabilizationCriterion loose : {StabilizationCriterion{3e-5, 1e-6}, StabilizationCriterion{1e-5, 4e-6}}) {
      const auto a = stabilization_time(traj, tight);
      const auto b = stabilization_time(traj, loose);
      if (a) {
        REQUIRE(b);
        CHECK(*b <= *a);
      }
    }
  }
}

TEST_CASE("summaries read the fidelity at t_S or a fixed t_f") {
  const auto m = build_effective_model(reference_spec(2.0, 1.0, 0.15));
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 700.0;
  cfg.record_stride = 10;
  const auto traj = integrate_closed_loop(m, make_control_law(m), DensityMatrix::pure(m.basis.gg), cfg);
  const auto s = summarize(traj, m, ScenarioTag::ADB);
  REQUIRE(s.t_S);
  CHECK(s.t_f == *s.t_S);
  CHECK(*s.T == doctest::Approx(*s.t_S * std::cosh(2.0)));
  const auto fixed = summarize(traj, m, ScenarioTag::ADB, {}, 160.0);
  CHECK(fixed.t_f == doctest::Approx(160.0));
  CHECK(fixed.fidelity * fixed.fidelity == doctest::Approx(traj.points[160].P_S));
  CHECK(s.final_populations.size() == 5);
  CHECK(s.final_populations[0].first == "S");
}

TEST_CASE("scaling check") {
  std::vector<RunSummary> flat = {with_T(1.0, 560.0), with_T(1.5, 600.0), with_T(2.0, 540.0), with_T(2.5, 580.0)};
  const auto rep = scaling_check(flat);
  CHECK(rep.passes);
  CHECK(rep.mean == doctest::Approx(570.0));
  std::vector<RunSummary> steep = {with_T(1.0, 300.0), with_T(1.5, 500.0), with_T(2.0, 700.0), with_T(2.5, 900.0)};
  CHECK_FALSE(scaling_check(steep).passes);
  CHECK(T_increases_with_rp(steep));
  CHECK_FALSE(T_increases_with_rp(flat));
  CHECK_THROWS_AS(scaling_check({with_T(1.0, 500.0)}), AnalysisError);
  auto missing = flat;
  missing[2] = with_T(2.0, std::nullopt);
  CHECK_THROWS_AS(scaling_check(missing), AnalysisError);
  std::vector<RunSummary> narrow = {with_T(1.0, 1), with_T(1.1, 1), with_T(1.2, 1), with_T(1.3, 1)};
  CHECK_THROWS_AS(scaling_check(narrow), AnalysisError);
}

TEST_CASE("scenario classification") {
  CHECK(classify(0.0, 0.0, 0.0) == ScenarioTag::TDB);
  CHECK(classify(0.0, 1.0, 0.15) == ScenarioTag::PM);
  CHECK(classify(2.0, 0.0, 0.0) == ScenarioTag::PA);
  CHECK(classify(2.0, 1.0, 0.0) == ScenarioTag::ADB);
  CHECK(scenario_tag_from_string(to_string(ScenarioTag::PA)) == ScenarioTag::PA);
  CHECK_THROWS_AS(scenario_tag_from_string("XX"), AnalysisError);
}
