#include "platoon/eso.hpp"

#include <cmath>
#include <stdexcept>

namespace platoon {

void EsoParams::validate() const {
  if (!(l > 0.0) || !(b_hat > 0.0) || !(M > 0.0) || !std::isfinite(l) || !std::isfinite(M)) {
    throw std::invalid_argument("observer parameters l, b_hat and M must be positive");
  }
}

double eso_deriv(const EsoState& es, double a, const EsoParams& params) {
  const double l = params.l;
  return -l * es.s - l * l * a - l * params.b_hat * es.gamma;
}

double estimate_q(const EsoState& es, double a, const EsoParams& params) {
  return es.s + params.l * a;
}

TriggerResult trigger_check(const EsoState& es, double u_now, const EsoParams& params, double t) {
  if (t < es.last_trigger_t) {
    throw std::invalid_argument("trigger check earlier than last trigger");
  }
  TriggerResult out{false, es.gamma - u_now, es};
  if (std::abs(out.psi) >= params.M) {
    out.fired = true;
    out.psi = 0.0;
    out.state.gamma = u_now;
    out.state.last_trigger_t = t;
    ++out.state.trigger_count;
  }
  return out;
}

EsoState initial_eso_state(double u0, double s0) {
  EsoState es;
  es.s = s0;
  es.gamma = u0;
  es.last_trigger_t = 0.0;
  es.trigger_count = 1;
  return es;
}

}  // namespace platoon
