#pragma once

// Dormand–Prince 5(4) integrator with Shampine's continuous extension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sfgsta/errors.hpp"

namespace sfg::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Tolerances {
  double rel = 1e-9;
  double abs = 1e-12;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

template <std::size_t N>
struct Solution {
  std::vector<Vec<N>> samples;  // one per requested sample coordinate
  Vec<N> final_state{};
  Stats stats;
};

namespace detail {

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, const Tolerances& tol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = tol.abs + tol.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

}  // namespace detail

/// Integrates y' = rhs(z, y) from z0 to z1 (z1 > z0).
///
/// `sample_z` must be non-decreasing and lie in [z0, z1]; values are produced
/// from the dense output of the accepted step that covers them, except that
/// samples equal to z0 or z1 return the exact initial/final states.
/// Throws IntegrationError when the step size underflows or the step budget
/// is exhausted.
template <std::size_t N, class Rhs>
Solution<N> dopri5(Rhs&& rhs, double z0, double z1, Vec<N> y, std::span<const double> sample_z,
                   const Tolerances& tol, std::size_t max_steps = 20'000'000) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  Solution<N> sol;
  sol.samples.resize(sample_z.size());
  std::size_t next_sample = 0;
  while (next_sample < sample_z.size() && sample_z[next_sample] <= z0) {
    sol.samples[next_sample++] = y;
  }

  Vec<N> k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{}, y_new{}, err{};
  auto eval = [&](double z, const Vec<N>& state, Vec<N>& out) {
    rhs(z, state, out);
    ++sol.stats.evaluations;
  };

  const double span = z1 - z0;
  double z = z0;
  eval(z, y, k1);

  // Initial step from the local Lipschitz estimate (Hairer–Wanner II.4).
  double h;
  {
    double d0 = 0, dd1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol.abs + tol.rel * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      dd1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    dd1 = std::sqrt(dd1 / N);
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h0 * k1[i];
    eval(z + h0, tmp, k2);
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol.abs + tol.rel * std::abs(y[i]);
      d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dmax = std::max(dd1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    h = std::min({100 * h0, h1, span});
  }

  bool last_rejected = false;
  std::size_t steps = 0;
  while (z < z1) {
    if (++steps > max_steps) {
      throw IntegrationError("step budget exhausted at z = " + std::to_string(z) + " mm", z);
    }
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z));
    if (h < min_step) {
      throw IntegrationError(
          "step size underflow at z = " + std::to_string(z) +
              " mm; profile too stiff for the requested tolerance",
          z);
    }
    bool final_step = false;
    if (z + h >= z1 || z + 1.01 * h >= z1) {
      h = z1 - z;
      final_step = true;
    }

    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    eval(z + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    eval(z + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(z + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(z + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double z_next = final_step ? z1 : z + h;
    eval(z_next, tmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(z_next, y_new, k7);
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double en = detail::error_norm(err, y, y_new, tol);
    if (!std::isfinite(en)) {
      throw IntegrationError("non-finite state at z = " + std::to_string(z) + " mm", z);
    }
    if (en <= 1.0) {
      // Dense output coefficients for samples inside (z, z_next].
      while (next_sample < sample_z.size() && sample_z[next_sample] <= z_next) {
        const double zs = sample_z[next_sample];
        if (final_step && zs >= z1) {
          sol.samples[next_sample++] = y_new;
          continue;
        }
        const double th = (zs - z) / h;
        const double th1 = 1.0 - th;
        Vec<N>& out = sol.samples[next_sample++];
        for (std::size_t i = 0; i < N; ++i) {
          const double r2 = y_new[i] - y[i];
          const double r3 = h * k1[i] - r2;
          const double r4 = r2 - h * k7[i] - r3;
          const double r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                 d7 * k7[i]);
          out[i] = y[i] + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
        }
      }
      y = y_new;
      k1 = k7;
      z = z_next;
      ++sol.stats.accepted;
      double fac = en == 0.0 ? 10.0 : 0.9 * std::pow(en, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++sol.stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
    }
  }
  while (next_sample < sample_z.size()) sol.samples[next_sample++] = y;
  sol.final_state = y;
  return sol;
}

}  // namespace sfg::ode
