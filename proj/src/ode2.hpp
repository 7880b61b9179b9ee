#pragma once

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "vegspot/errors.hpp"

namespace vegspot::detail {

using State2 = std::array<double, 2>;

struct EventHit {
  bool hit = false;
  double t = 0.0;
  State2 y{};
};

// Integrates y' = rhs(y, dydt, t) from t0 toward t1 (either direction) with an
// adaptive dopri5 pair and dense output. observer(t, y) sees every accepted step.
// The first sign change of event(t, y) is located on the dense output to
// |event| <= eventTol or a bracket below 1e-14 relative; integration stops there.
template <class Rhs, class Event, class Observer>
EventHit integrate_with_event(Rhs rhs, double t0, State2 y0, double t1, Event event,
                              Observer observer, double rtol, double atol, double eventTol) {
  namespace odeint = boost::numeric::odeint;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  auto stepper = odeint::make_dense_output(atol, rtol, odeint::runge_kutta_dopri5<State2>());
  double dt0 = dir * std::min(1e-4, std::abs(t1 - t0)) ;
  stepper.initialize(y0, t0, dt0);
  observer(t0, y0);
  double g_prev = event(t0, y0);
  EventHit res;
  long steps = 0;
  try {
    while (dir * (stepper.current_time() - t1) < 0.0) {
      if (++steps > 2000000) throw Error("IntegrationFailure", "step budget exhausted");
      auto [ta, tb] = stepper.do_step(rhs);
      (void)ta;
      State2 yb = stepper.current_state();
      if (!std::isfinite(yb[0]) || !std::isfinite(yb[1]))
        throw Error("IntegrationFailure", "non-finite state");
      double g = event(tb, yb);
      if ((g_prev > 0.0) != (g > 0.0) || g == 0.0) {
        // Illinois-modified regula falsi on the dense interpolant.
        double lo = stepper.previous_time(), hi = tb;
        double glo = g_prev, ghi = g;
        State2 ym{};
        double tm = hi;
        int side = 0;
        for (int it = 0; it < 200; ++it) {
          tm = (lo * ghi - hi * glo) / (ghi - glo);
          if (!(dir * (tm - lo) > 0.0 && dir * (hi - tm) > 0.0)) tm = 0.5 * (lo + hi);
          stepper.calc_state(tm, ym);
          double gm = event(tm, ym);
          if (std::abs(gm) <= eventTol || std::abs(hi - lo) <= 1e-14 * std::max(1.0, std::abs(tm)))
            break;
          if ((gm > 0.0) == (glo > 0.0)) {
            lo = tm;
            glo = gm;
            if (side == -1) ghi *= 0.5;
            side = -1;
          } else {
            hi = tm;
            ghi = gm;
            if (side == 1) glo *= 0.5;
            side = 1;
          }
        }
        res.hit = true;
        res.t = tm;
        res.y = ym;
        observer(tm, ym);
        return res;
      }
      if (dir * (tb - t1) > 0.0) {
        State2 yend{};
        stepper.calc_state(t1, yend);
        observer(t1, yend);
        res.t = t1;
        res.y = yend;
        return res;
      }
      observer(tb, yb);
      g_prev = g;
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw Error("IntegrationFailure", e.what());
  }
  res.t = stepper.current_time();
  res.y = stepper.current_state();
  return res;
}

}  // namespace vegspot::detail
