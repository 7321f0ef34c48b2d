#include "sfgsta/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sfgsta/errors.hpp"
#include "sfgsta/format.hpp"
#include "sfgsta/ode.hpp"

namespace sfg {

BlochVector bloch_vector(const ModeState& s) {
  const std::complex<double> c = std::conj(s.a1) * s.a3;
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(s.a1) - std::norm(s.a3)};
}

DriveProfile::DriveProfile(std::string scheme, double length_mm, Field delta_k, Field coupling)
    : scheme_(std::move(scheme)),
      length_(length_mm),
      delta_k_(std::move(delta_k)),
      coupling_(std::move(coupling)) {
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw ContractError("drive profile length must be positive and finite");
  }
  if (!delta_k_ || !coupling_) throw ContractError("drive profile requires ΔK(z) and Q(z)");
}

double DriveProfile::delta_k_slope(double z) const {
  if (slope_) return slope_(z);
  const double h = length_ * 1e-6;
  const double lo = std::max(0.0, z - h);
  const double hi = std::min(length_, z + h);
  return (delta_k_(hi) - delta_k_(lo)) / (hi - lo);
}

DriveProfile DriveProfile::with_slope(Field slope) const {
  DriveProfile p = *this;
  p.slope_ = std::move(slope);
  return p;
}

DriveProfile DriveProfile::with_coupling_y(Field coupling_y) const {
  DriveProfile p = *this;
  p.coupling_y_ = std::move(coupling_y);
  return p;
}

DriveProfile DriveProfile::with_parameter(const std::string& key, double value) const {
  DriveProfile p = *this;
  p.parameters_[key] = value;
  return p;
}

DriveProfile DriveProfile::shifted(double delta_k_offset) const {
  DriveProfile p = *this;
  p.offset_ += delta_k_offset;
  return p;
}

namespace {

std::vector<double> sample_grid(double length, std::size_t requested) {
  const std::size_t n = std::max<std::size_t>(requested, 501);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = length * static_cast<double>(i) / static_cast<double>(n - 1);
  z.back() = length;
  return z;
}

void check_options(const PropagationOptions& o) {
  if (!(o.rel_tol > 0.0 && o.rel_tol < 1.0) || !(o.abs_tol > 0.0 && o.abs_tol < 1.0)) {
    throw ContractError("tolerances must lie in (0, 1)");
  }
}

void check_normalized(const ModeState& s) {
  if (std::abs(s.norm_squared() - 1.0) > 1e-9) {
    throw ContractError("initial state must be normalized (|a1|^2 + |a3|^2 = 1)");
  }
}

ModeState to_state(const ode::Vec<4>& y) { return {{y[0], y[1]}, {y[2], y[3]}}; }

Trajectory collect(const std::vector<double>& z, const ode::Solution<4>& sol) {
  Trajectory t;
  t.z = z;
  t.states.reserve(z.size());
  for (const auto& y : sol.samples) {
    t.states.push_back(to_state(y));
    t.norm_drift = std::max(t.norm_drift, std::abs(t.states.back().norm_squared() - 1.0));
  }
  t.states.back() = to_state(sol.final_state);
  t.norm_drift = std::max(t.norm_drift, std::abs(t.states.back().norm_squared() - 1.0));
  t.steps_accepted = sol.stats.accepted;
  t.steps_rejected = sol.stats.rejected;
  return t;
}

}  // namespace

Trajectory propagate(const DriveProfile& profile, const ModeState& initial,
                     const PropagationOptions& options) {
  check_options(options);
  check_normalized(initial);
  const auto z = sample_grid(profile.length(), options.samples);
  const bool two_field = profile.has_coupling_y();
  auto rhs = [&](double zz, const ode::Vec<4>& y, ode::Vec<4>& dy) {
    const double half_dk = 0.5 * profile.delta_k(zz);
    const double q = profile.coupling(zz);
    const double qy = two_field ? profile.coupling_y(zz) : 0.0;
    // i a1' = ΔK/2 a1 + (q − i qy) a3 ;  i a3' = (q + i qy) a1 − ΔK/2 a3
    const double h1r = half_dk * y[0] + q * y[2] + qy * y[3];
    const double h1i = half_dk * y[1] + q * y[3] - qy * y[2];
    const double h3r = q * y[0] - qy * y[1] - half_dk * y[2];
    const double h3i = q * y[1] + qy * y[0] - half_dk * y[3];
    dy = {h1i, -h1r, h3i, -h3r};
  };
  const ode::Vec<4> y0{initial.a1.real(), initial.a1.imag(), initial.a3.real(), initial.a3.imag()};
  const auto sol = ode::dopri5<4>(rhs, 0.0, profile.length(), y0, z,
                                  ode::Tolerances{options.rel_tol, options.abs_tol});
  return collect(z, sol);
}

Trajectory propagate_original_frame(std::complex<double> q, const std::function<double(double)>& mismatch,
                                    double length_mm, const ModeState& initial,
                                    const PropagationOptions& options) {
  check_options(options);
  check_normalized(initial);
  if (!(length_mm > 0.0)) throw ContractError("length must be positive");
  const auto z = sample_grid(length_mm, options.samples);
  const std::complex<double> qc = std::conj(q);
  // State: Re Ã1, Im Ã1, Re Ã3, Im Ã3, Φ.
  auto rhs = [&](double zz, const ode::Vec<5>& y, ode::Vec<5>& dy) {
    const std::complex<double> a1{y[0], y[1]}, a3{y[2], y[3]};
    const std::complex<double> phase = std::polar(1.0, y[4]);
    const std::complex<double> d1 = std::complex<double>(0, -1) * q * a3 * std::conj(phase);
    const std::complex<double> d3 = std::complex<double>(0, -1) * qc * a1 * phase;
    dy = {d1.real(), d1.imag(), d3.real(), d3.imag(), mismatch(zz)};
  };
  const ode::Vec<5> y0{initial.a1.real(), initial.a1.imag(), initial.a3.real(), initial.a3.imag(), 0.0};
  const auto sol =
      ode::dopri5<5>(rhs, 0.0, length_mm, y0, z, ode::Tolerances{options.rel_tol, options.abs_tol});
  Trajectory t;
  t.z = z;
  for (const auto& y : sol.samples) t.states.push_back({{y[0], y[1]}, {y[2], y[3]}});
  const auto& f = sol.final_state;
  t.states.back() = {{f[0], f[1]}, {f[2], f[3]}};
  for (const auto& s : t.states) t.norm_drift = std::max(t.norm_drift, std::abs(s.norm_squared() - 1.0));
  t.steps_accepted = sol.stats.accepted;
  t.steps_rejected = sol.stats.rejected;
  return t;
}

double adiabaticity_measure(const DriveProfile& profile, double z) {
  if (!(z >= 0.0 && z <= profile.length())) throw DomainError("z outside [0, L]");
  const double q = profile.coupling(z);
  const double dk = profile.delta_k(z);
  const double denom = q * q + dk * dk;
  if (denom == 0.0) {
    throw SingularityError("adiabaticity undefined where Q = dK = 0 (z = " + std::to_string(z) + " mm)");
  }
  return std::abs(q * profile.delta_k_slope(z)) / std::pow(denom, 1.5);
}

AdiabaticityPeak max_adiabaticity(const DriveProfile& profile, std::size_t grid) {
  grid = std::max<std::size_t>(grid, 2);
  AdiabaticityPeak peak;
  for (std::size_t i = 0; i < grid; ++i) {
    const double z = std::min(profile.length(), profile.length() * static_cast<double>(i) / static_cast<double>(grid - 1));
    const double c = adiabaticity_measure(profile, z);
    if (c > peak.value) peak = {c, z};
  }
  return peak;
}

double efficiency(const Trajectory& trajectory) {
  if (trajectory.states.empty()) throw ContractError("empty trajectory");
  const ModeState& s0 = trajectory.initial();
  if (std::norm(s0.a3) > 1e-12 || std::abs(std::norm(s0.a1) - 1.0) > 1e-9) {
    throw ContractError("efficiency requires a trajectory that starts in the pure signal mode");
  }
  return std::norm(trajectory.final_state().a3) / std::norm(s0.a1);
}

std::vector<double> eigenstate_fidelity(const DriveProfile& profile, const Trajectory& trajectory) {
  std::vector<double> out;
  out.reserve(trajectory.z.size());
  double branch = 0.0;
  for (std::size_t i = 0; i < trajectory.z.size(); ++i) {
    const double z = trajectory.z[i];
    const double hx = 2.0 * profile.coupling(z);
    const double hy = 2.0 * profile.coupling_y(z);
    const double hz = profile.delta_k(z);
    const double norm = std::sqrt(hx * hx + hy * hy + hz * hz);
    if (norm == 0.0) {
      throw SingularityError("degenerate eigenvalues (Q = dK = 0) at z = " + std::to_string(z) + " mm");
    }
    const BlochVector b = bloch_vector(trajectory.states[i]);
    const double proj = (hx * b.x + hy * b.y + hz * b.z) / norm;
    if (i == 0) branch = proj >= 0.0 ? 1.0 : -1.0;
    out.push_back(0.5 * (1.0 + branch * proj));
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "z_mm,re_a1,im_a1,re_a3,im_a3,pop1,pop3,bloch_x,bloch_y,bloch_z\n";
  for (std::size_t i = 0; i < t.z.size(); ++i) {
    const auto& s = t.states[i];
    const auto b = bloch_vector(s);
    out << fmt_sci(t.z[i]) << ',' << fmt_sci(s.a1.real()) << ',' << fmt_sci(s.a1.imag()) << ','
        << fmt_sci(s.a3.real()) << ',' << fmt_sci(s.a3.imag()) << ',' << fmt_sci(s.signal_population())
        << ',' << fmt_sci(s.idler_population()) << ',' << fmt_sci(b.x) << ',' << fmt_sci(b.y) << ','
        << fmt_sci(b.z) << '\n';
  }
}

}  // namespace sfg
