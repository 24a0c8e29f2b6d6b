#pragma once

// Deterministic mean-field reference for the daily chain-binomial model.
// Within each day every compartment drains with a constant hazard frozen at
// the start-of-day state (force of infection beta*I/N), integrated with RK4.

#include <array>
#include <vector>

namespace inp::testing {

struct OdeState {
  double S, E, I, R;
};

inline double rk4_decay_fraction(double rate, int substeps = 50) {
  // y' = -rate * y, y(0) = 1, integrated on [0, 1]
  double y = 1.0;
  const double h = 1.0 / substeps;
  for (int k = 0; k < substeps; ++k) {
    const double k1 = -rate * y;
    const double k2 = -rate * (y + 0.5 * h * k1);
    const double k3 = -rate * (y + 0.5 * h * k2);
    const double k4 = -rate * (y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return 1.0 - y;  // fraction that left
}

/// Mean-field infectious series I_1..I_T.
inline std::vector<double> mean_field_infectious(double beta, double epsilon, double mu, double N,
                                                 double E0, double I0, int horizon) {
  OdeState x{N - E0 - I0, E0, I0, 0.0};
  std::vector<double> out;
  out.reserve(horizon);
  const double f_ei = rk4_decay_fraction(epsilon);
  const double f_ir = rk4_decay_fraction(mu);
  for (int t = 0; t < horizon; ++t) {
    const double f_se = rk4_decay_fraction(beta * x.I / N);
    const double se = x.S * f_se, ei = x.E * f_ei, ir = x.I * f_ir;
    x = {x.S - se, x.E + se - ei, x.I + ei - ir, x.R + ir};
    out.push_back(x.I);
  }
  return out;
}

}  // namespace inp::testing
