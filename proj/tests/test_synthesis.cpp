#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "platoon/controller.hpp"
#include "platoon/scenario.hpp"
#include "platoon/synthesis.hpp"

using namespace platoon;

namespace {

const ModelBounds kBounds{{1500, 2000}, {0.2, 0.4}, {0.02, 0.05}, {0.2, 0.4}};

VehicleGains reference_gains() {
  VehicleGains g;
  g.k1 = 0.8;
  g.k2 = 1.5;
  g.k3 = 300;
  g.h1 = 2;
  g.h2 = 8;
  g.kappa1 = 0.05;
  g.kappa2 = 0.01;
  g.l = 1200;
  g.b_hat = 0.003;
  g.xi = 0.002;
  return g;
}

GainSet reference_set(std::size_t n) {
  GainSet gs;
  gs.vehicles.assign(n, reference_gains());
  gs.delta = 7;
  gs.epsilon = 0.1;
  return gs;
}

const Condition* find(const VerificationReport& r, const std::string& name) {
  for (const Condition& c : r.conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string config(const char* name) { return std::string(PLATOON_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(BWindow, DefaultBounds) {
  const BWindow w = compute_b_window(kBounds);
  EXPECT_NEAR(w.b_hi, 1.0 / 300, 1e-18);
  EXPECT_NEAR(w.b_lo, 1.0 / 800, 1e-18);
  EXPECT_NEAR(w.lower, 1.0 / 600, 1e-18);
  EXPECT_NEAR(w.upper, 1.0 / 300, 1e-18);
  EXPECT_FALSE(w.lower_inclusive);
  EXPECT_TRUE(w.contains(0.003));
  EXPECT_FALSE(w.contains(1.0 / 600));
  EXPECT_TRUE(w.contains(1.0 / 300));
  EXPECT_FALSE(w.contains(0.0034));
}

TEST(BWindow, DegenerateBoundsAdmitTrueGain) {
  const ModelBounds b{{1500, 1500}, {0.3, 0.3}, {0.03, 0.03}, {0.2, 0.2}};
  const BWindow w = compute_b_window(b);
  EXPECT_EQ(w.b_lo, w.b_hi);
  EXPECT_TRUE(w.lower_inclusive);
  EXPECT_TRUE(w.contains(1.0 / 300));
  EXPECT_FALSE(w.contains(0.99 / 300));
  EXPECT_EQ(compute_cb_bar(w.b_lo, w.b_hi, w.b_hi), 0.0);
}

TEST(CbBar, Examples) {
  const double b_hi = 1.0 / 300, b_lo = 1.0 / 800;
  EXPECT_NEAR(compute_cb_bar(b_lo, b_hi, b_hi), (b_hi - b_lo) / b_hi, 1e-15);
  EXPECT_NEAR(compute_cb_bar(b_lo, b_hi, 0.003), 0.58333333333333, 1e-12);
  EXPECT_NEAR((b_hi - 0.003) / 0.003, 0.1111111111111, 1e-12);
  const double mid = 0.5 * (b_lo + b_hi);
  EXPECT_NEAR((b_hi - mid) / mid, (mid - b_lo) / mid, 1e-15);
}

TEST(E1Bar, OnlyRollingTermSurvives) {
  E1Inputs in;
  in.tau_true = 0.3;
  EXPECT_NEAR(compute_e1_bar(in, kBounds, 0.003), kGravity * 0.05 / 0.2, 1e-14);
}

TEST(E1Bar, LinearInSigma1) {
  E1Inputs in;
  in.initial = {71, 10, 0.5};
  in.u0 = 1000;
  in.q_hat0 = -3;
  in.sigma1 = 2;
  in.tau_true = 0.3;
  const double a = compute_e1_bar(in, kBounds, 0.003);
  in.sigma1 = 4;
  EXPECT_NEAR(compute_e1_bar(in, kBounds, 0.003) - a, 2.0, 1e-12);
}

TEST(C1, InitialStatesOfDefaultPlatoon) {
  const Scenario sc = default_scenario();
  const VehicleGains g = reference_gains();
  double v_prev = sc.leader_initial.v;
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const KinematicState& s = sc.followers[i].initial;
    const C1Result r = check_c1(v_prev - s.v, s.a, g, 7);
    EXPECT_TRUE(r.pass) << "vehicle " << i + 1;
    EXPECT_EQ(r.bound, 49.0);
    v_prev = s.v;
  }
  EXPECT_EQ(check_c1(0, 0, g, 7).lhs, 0.0);
  EXPECT_NEAR(check_c1(-1, 1.5, g, 7).lhs, 0.25 + 9.0 / 64, 1e-15);
  EXPECT_NEAR(check_c1(0, -2, g, 7).lhs, 4.0 / 64, 1e-15);
  EXPECT_FALSE(check_c1(20, 0, g, 7).pass);
}

TEST(GainBounds, K1BoundWithZeroSlack) {
  const GainBounds b = gain_bounds(reference_gains(), 0.1, 0, 0, 0);
  EXPECT_NEAR(b.k1_min, (3 * 0.002 + 0.01) / 0.02, 1e-15);
  EXPECT_NEAR(b.k1_min, 0.8, 1e-14);
  const auto conds = check_c2_c3(reference_gains(), 0.1, 0, 0, 0, "x.");
  EXPECT_EQ(conds[0].name, "x.C2.k1");
  EXPECT_LT(std::abs(conds[0].margin), 1e-12);
}

TEST(GainBounds, LimitWithEpsilonEqualDelta) {
  VehicleGains g = reference_gains();
  g.xi = 1e-12;
  const GainBounds b = gain_bounds(g, 7, 0, 0, 0);
  EXPECT_NEAR(b.k1_min, 0.5, 1e-10);
  EXPECT_NEAR(b.k2_min, 0.5, 1e-10);
}

TEST(GainBounds, Kappa1FromChain) {
  const auto chain = propagate_chain(reference_set(8), 10, 2);
  const double xi = 0.002, e2 = 0.01, a3 = chain[0].alpha3;
  const double expected = 2 * xi * e2 / (3 * xi * xi + xi * e2 * 4 + e2 * a3 * a3);
  EXPECT_NEAR(gain_bounds(reference_gains(), 0.1, 100, a3, chain[0].alpha4).kappa1_max, expected,
              1e-15);
  EXPECT_NEAR(a3, 2.0 / 2 + (1.6 + 0.32) * 7, 1e-12);
}

TEST(Chain, ReferenceGainArithmetic) {
  const auto chain = propagate_chain(reference_set(8), 10, 2);
  EXPECT_NEAR(chain[0].v_bar, 43.6, 1e-12);
  EXPECT_NEAR(chain[1].v_bar, 77.2, 1e-12);
  EXPECT_NEAR(chain[0].a_bar, 441.0, 1e-12);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    EXPECT_NEAR(chain[i].v_bar - chain[i - 1].v_bar, 33.6, 1e-10);
    EXPECT_NEAR(chain[i].alpha3, 441.0 / 2 + 1.92 * 7, 1e-10);
  }
}

TEST(Chain, ZeroDeltaLimit) {
  GainSet gs = reference_set(4);
  gs.delta = 0;
  const auto chain = propagate_chain(gs, 10, 2);
  EXPECT_EQ(chain[0].alpha3, 1.0);
  for (const ChainEntry& c : chain) {
    EXPECT_EQ(c.v_bar, 10.0);
    EXPECT_EQ(c.a_bar, 0.0);
  }
  EXPECT_EQ(chain[1].alpha3, 0.0);
}

TEST(CConstants, ExactGainDropsMismatchTerms) {
  const VehicleGains g = reference_gains();
  const CInputs in{0.0, 43.6, 441, 5000, 3, 7};
  const CConstants c = compute_c_constants(g, in, kBounds);
  EXPECT_NEAR(c.c2, 1 / 0.2 + 2 * 0.4 * 43.6 / 1500, 1e-12);
  const double drag = c.c2;
  const double c1 = drag * (300 + 8.0 / 2 + 1 / 0.01) * 8 * 7 + 2 * 0.4 * 43.6 * 441 / (1500 * 0.2) +
                    2 * 0.4 * 441 * 441 / 1500 + 3;
  EXPECT_NEAR(c.c1, c1, 1e-9 * c1);
}

TEST(CConstants, UnitSensitivityToSigma2) {
  const VehicleGains g = reference_gains();
  CInputs in{0.58, 43.6, 441, 5000, 3, 7};
  const double base = compute_c_constants(g, in, kBounds).c1;
  in.sigma2 = 5.5;
  EXPECT_NEAR(compute_c_constants(g, in, kBounds).c1 - base, 2.5, 1e-6);
}

TEST(ObserverRequirements, Examples) {
  const double c2 = 180, cb = 0.5, e1 = 10, b = 0.003;
  EXPECT_NEAR(observer_requirements(0, c2, cb, e1, b, 1000).l_min, c2 / (1 - cb), 1e-12);
  const double c1 = 2000;
  const double l_min = observer_requirements(c1, c2, cb, e1, b, 1).l_min;
  EXPECT_NEAR(observer_requirements(c1, c2, cb, e1, b, l_min).M, 0.0, 1e-9);
  EXPECT_GT(observer_requirements(c1, c2, cb, e1, b, 2 * l_min).M, 0.0);
  EXPECT_LT(observer_requirements(c1, c2, cb, e1, b, 0.5 * l_min).M, 0.0);
  EXPECT_THROW(observer_requirements(c1, c2, 1.0, e1, b, 1000), std::domain_error);
}

TEST(ZenoBound, LargeThresholdLimit) {
  const VehicleGains g = reference_gains();
  const ZenoBound z = zeno_bound(g, 10, 100, 7, 1e15);
  EXPECT_NEAR(z.tau_min, 1.0 / g.l, 1e-6 / g.l);
  EXPECT_GT(z.B, 0);
  EXPECT_NEAR(z.tau_min, 1e15 / (g.l * 1e15 + z.B), 1e-20);
  EXPECT_EQ(zeno_bound(g, 10, 100, 7, -1).tau_min, 0.0);
}

TEST(ZenoBound, MonotoneInThreshold) {
  const VehicleGains g = reference_gains();
  double prev = 0;
  for (double M : {0.1, 1.0, 10.0, 100.0, 1e4}) {
    const double t = zeno_bound(g, 10, 100, 7, M).tau_min;
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(InitialError, SymmetricQuadratic) {
  const VehicleGains g = reference_gains();
  const InitialErrorBound b = admissible_initial_error(0, 0, g, 7);
  EXPECT_EQ(b.B0, 0.0);
  EXPECT_EQ(b.C0, -49.0);
  EXPECT_TRUE(b.admissible);
  EXPECT_NEAR(b.iota, 7 / std::sqrt(b.A0), 1e-14);
  EXPECT_NEAR(b.A0, 1 + 0.64 / 4 + 5.2 * 5.2 / 64, 1e-14);
}

TEST(InitialError, RootLiesOnSurfaceBall) {
  // At |e(0)| = iota the initial surface vector (e, z1, z2) has norm delta.
  const VehicleGains g = reference_gains();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k = 0; k < 200; ++k) {
    const double vd = U(rng), a = U(rng);
    const InitialErrorBound b = admissible_initial_error(vd, a, g, 7);
    ASSERT_TRUE(b.admissible);
    bool on_ball = false;
    for (double e : {b.iota, -b.iota}) {
      const SensorReading in{10.0, a, 10.0 + vd, 8 + e};
      const SurfaceSnapshot s = evaluate_surfaces(in, 8, initial_filter_state(in, 8, g), 0, g);
      on_ball |= std::abs(e * e + s.z1 * s.z1 + s.z2 * s.z2 - 49.0) < 1e-9;
    }
    ASSERT_TRUE(on_ball);
  }
  EXPECT_FALSE(admissible_initial_error(20, 0, g, 7).admissible);
}

TEST(MakeCondition, MarginsAndRelations) {
  const Condition c = make_condition("x", Relation::LessEq, 1, 2);
  EXPECT_TRUE(c.pass);
  EXPECT_DOUBLE_EQ(c.margin, 0.5);
  EXPECT_FALSE(make_condition("x", Relation::Greater, 2, 2).pass);
  EXPECT_TRUE(make_condition("x", Relation::GreaterEq, 2, 2).pass);
  EXPECT_LT(make_condition("x", Relation::GreaterEq, 1, 2).margin, 0);
}

TEST(VerifyAll, DefaultScenarioVehicleOne) {
  const Scenario sc = default_scenario();
  const VerificationReport rep = verify_all(sc);
  ASSERT_EQ(rep.vehicles.size(), 8u);
  const DerivedBounds& d = rep.vehicles[0];
  const double u0 = 8 * (0 - 300 * (-0.65) - 8 * (-0.4) / 2 - 0) / 0.003;
  EXPECT_NEAR(d.u0, u0, 1e-6);
  EXPECT_EQ(d.q_hat0, 0.0);
  EXPECT_NEAR(d.e0, 1.0, 1e-15);
  const DisturbanceParams& dp = sc.followers[0].disturbance;
  EXPECT_NEAR(d.sigma1, dp.lam1 + dp.lam3, 1e-15);
  const double e1 = 0.4 * 100 / 300 + 9.81 * 0.05 / 0.2 + (0.003 - 1.0 / 800) * u0 + d.sigma1;
  EXPECT_NEAR(d.e1_bar, e1, 1e-9 * e1);
  EXPECT_NEAR(d.v_bar, 33.6 + rep.v_bar_0, 1e-12);
  const double c2 = 1 / 0.2 + 2 * 0.4 * d.v_bar / 1500 + 0.58333333333333333 * 300;
  EXPECT_NEAR(d.c2, c2, 1e-9);
  EXPECT_NEAR(d.iota, 7 / std::sqrt(1 + 0.64 / 4 + 5.2 * 5.2 / 64), 1e-12);
  const Condition* k1 = find(rep, "v1.C2.k1");
  ASSERT_NE(k1, nullptr);
  EXPECT_TRUE(k1->pass);
  for (const char* n : {"v1.C1", "v8.C1", "platoon.epsilon", "platoon.delta", "v1.initial_error"}) {
    ASSERT_NE(find(rep, n), nullptr) << n;
    EXPECT_TRUE(find(rep, n)->pass) << n;
  }
  EXPECT_EQ(find(rep, "v1.observer.M_used"), nullptr);
  EXPECT_EQ(d.M_used, d.M);
}

TEST(VerifyAll, ConfiguredThresholdCheckedAgainstObserverBound) {
  const VerificationReport rep = verify_all(build_scenario(config("reference.yaml")));
  const Condition* c = find(rep, "v1.observer.M_used");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->actual, 50.0);
  EXPECT_EQ(c->required, rep.vehicles[0].M);
  EXPECT_EQ(c->pass, rep.vehicles[0].M >= 50.0);
  EXPECT_EQ(rep.vehicles[0].M_used, 50.0);
}

TEST(VerifyAll, FormatReportListsEveryCondition) {
  const VerificationReport rep = verify_all(default_scenario());
  const std::string text = format_report(rep);
  for (const Condition& c : rep.conditions) {
    EXPECT_NE(text.find("condition=" + c.name + " "), std::string::npos) << c.name;
  }
}

TEST(Suggest, RoundTripVerifiesClean) {
  const Scenario sc = build_scenario(config("synthesized.yaml"));
  const SuggestResult r = suggest(sc);
  ASSERT_TRUE(r.feasible) << r.reason;
  EXPECT_TRUE(r.report.all_pass());
  Scenario again = sc;
  again.gains = r.gains;
  EXPECT_TRUE(verify_all(again).all_pass());
  EXPECT_EQ(r.gains.vehicles[0].b_hat, sc.followers[0].params.control_gain());
}

TEST(Suggest, ShippedSynthesizedGainsVerify) {
  const VerificationReport rep = verify_all(build_scenario(config("synthesized.yaml")));
  EXPECT_TRUE(rep.all_pass()) << format_report(rep);
}

TEST(Suggest, NominalGainBelowWindowIsSingleFailure) {
  Scenario sc = build_scenario(config("synthesized.yaml"));
  sc.bounds.m = {1500, 1600};
  const BWindow w = compute_b_window(sc.bounds);
  ASSERT_TRUE(w.lower_inclusive);
  const SuggestResult r = suggest(sc, SuggestOptions{0.05, w.lower, 200});
  ASSERT_TRUE(r.feasible) << r.reason;
  sc.gains = r.gains;
  sc.gains.vehicles[0].b_hat = w.lower * (1 - 1e-9);
  const VerificationReport rep = verify_all(sc);
  const auto fails = rep.failures();
  ASSERT_EQ(fails.size(), 1u) << format_report(rep);
  EXPECT_EQ(fails[0]->name, "v1.observer.b_hat_lower");
}

TEST(Suggest, RejectsNominalGainOutsideWindow) {
  const Scenario sc = default_scenario();
  const SuggestResult r = suggest(sc, SuggestOptions{0.05, 0.001, 200});
  EXPECT_FALSE(r.feasible);
  EXPECT_NE(r.reason.find("b_hat"), std::string::npos);
}
