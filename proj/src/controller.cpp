#include "platoon/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace platoon {
namespace {

void require_positive(double x, const std::string& what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("gains." + what + " must be positive and finite");
  }
}

}  // namespace

void VehicleGains::validate() const {
  require_positive(k1, "k1");
  require_positive(k2, "k2");
  require_positive(k3, "k3");
  require_positive(h1, "h1");
  require_positive(h2, "h2");
  require_positive(kappa1, "kappa1");
  require_positive(kappa2, "kappa2");
  require_positive(l, "l");
  require_positive(b_hat, "b_hat");
  require_positive(xi, "xi");
  if (trigger_threshold) require_positive(*trigger_threshold, "trigger_threshold");
}

void GainSet::validate(const std::vector<double>& spacings) const {
  for (const auto& g : vehicles) g.validate();
  require_positive(delta, "delta");
  require_positive(epsilon, "epsilon");
  if (epsilon > delta) throw std::invalid_argument("gains.epsilon must not exceed delta");
  if (!spacings.empty()) {
    const double r_min = *std::min_element(spacings.begin(), spacings.end());
    if (!(delta < r_min)) {
      throw std::invalid_argument("gains.delta must be smaller than every spacing r_i");
    }
  }
}

double spacing_error(double p_prev, double p_self, double r) { return p_prev - p_self - r; }

double alpha1(double v_prev, double e, const VehicleGains& g) { return (v_prev + g.k1 * e) / g.h1; }

double alpha2(double z1, double eta1, double e, const VehicleGains& g) {
  return g.h1 * (-g.k2 * z1 - eta1 / g.kappa1 + g.h1 * e) / g.h2;
}

double control_u(double q_hat, double z1, double z2, double eta2, const VehicleGains& g) {
  return g.h2 * (-q_hat / g.h2 - g.k3 * z2 - g.h2 * z1 / g.h1 - eta2 / g.kappa2) / g.b_hat;
}

FilterRate filter_derivs(const FilterState& fs, double a1, double a2, const VehicleGains& g) {
  return {(a1 - fs.beta1) / g.kappa1, (a2 - fs.beta2) / g.kappa2};
}

SurfaceSnapshot evaluate_surfaces(const SensorReading& in, double r, const FilterState& fs,
                                  double q_hat, const VehicleGains& g) {
  SurfaceSnapshot s;
  s.e = in.gap - r;
  s.alpha1 = alpha1(in.v_prev, s.e, g);
  s.z1 = in.v / g.h1 - fs.beta1;
  s.eta1 = fs.beta1 - s.alpha1;
  s.alpha2 = alpha2(s.z1, s.eta1, s.e, g);
  s.z2 = in.a / g.h2 - fs.beta2;
  s.eta2 = fs.beta2 - s.alpha2;
  s.u = control_u(q_hat, s.z1, s.z2, s.eta2, g);
  return s;
}

FilterState initial_filter_state(const SensorReading& in, double r, const VehicleGains& g) {
  const double e = in.gap - r;
  FilterState fs;
  fs.beta1 = alpha1(in.v_prev, e, g);
  const double z1 = in.v / g.h1 - fs.beta1;
  fs.beta2 = alpha2(z1, 0.0, e, g);
  return fs;
}

ControllerStepResult controller_step(const SensorReading& in, double r, const FilterState& fs,
                                     double q_hat, const VehicleGains& g, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("controller_step: dt must be positive");
  auto rate = [&](const FilterState& x) {
    const SurfaceSnapshot s = evaluate_surfaces(in, r, x, q_hat, g);
    return filter_derivs(x, s.alpha1, s.alpha2, g);
  };
  auto shift = [](const FilterState& x, const FilterRate& d, double h) {
    return FilterState{x.beta1 + h * d.beta1_dot, x.beta2 + h * d.beta2_dot};
  };
  const FilterRate k1 = rate(fs);
  const FilterRate k2 = rate(shift(fs, k1, dt / 2));
  const FilterRate k3 = rate(shift(fs, k2, dt / 2));
  const FilterRate k4 = rate(shift(fs, k3, dt));

  ControllerStepResult out;
  out.snapshot = evaluate_surfaces(in, r, fs, q_hat, g);
  out.u = out.snapshot.u;
  out.next.beta1 =
      fs.beta1 + dt / 6 * (k1.beta1_dot + 2 * k2.beta1_dot + 2 * k3.beta1_dot + k4.beta1_dot);
  out.next.beta2 =
      fs.beta2 + dt / 6 * (k1.beta2_dot + 2 * k2.beta2_dot + 2 * k3.beta2_dot + k4.beta2_dot);
  return out;
}

double baseline_u(double e, double v_diff, double a_prev, double a_self, const BaselineGains& k) {
  return k.kp * e + k.kv * v_diff + k.ka * a_prev + k.kd * a_self;
}

}  // namespace platoon
