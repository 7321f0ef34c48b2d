#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sfgsta/errors.hpp"
#include "sfgsta/profiles.hpp"

namespace sfg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kPanels = 512;
using Gauss = boost::math::quadrature::gauss<double, 20>;
}  // namespace

FourierShape::FourierShape(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw ValidationError("Fourier coefficients must be finite");
  }
}

double FourierShape::m(double zeta) const {
  double v = 2.0 * zeta;
  for (std::size_t n = 1; n <= coeffs_.size(); ++n) v += coeffs_[n - 1] * std::sin(2.0 * n * zeta);
  return v;
}

double FourierShape::M(double zeta) const {
  double v = 1.0;
  for (std::size_t n = 1; n <= coeffs_.size(); ++n) v += n * coeffs_[n - 1] * std::cos(2.0 * n * zeta);
  return v;
}

double FourierShape::M_prime(double zeta) const {
  double v = 0.0;
  for (std::size_t n = 1; n <= coeffs_.size(); ++n) {
    v -= 2.0 * n * n * coeffs_[n - 1] * std::sin(2.0 * n * zeta);
  }
  return v;
}

FourierShape build_m(std::vector<double> coeffs) { return FourierShape(std::move(coeffs)); }

double beta_of_zeta(double M, double zeta) { return 0.5 * kPi - std::atan(2.0 * M * std::sin(zeta)); }

struct InvariantDesign::Impl {
  FourierShape shape;
  double q0 = 0.0;
  double length = 0.0;
  double bound = 0.0;
  // s = Q₀z at ζ_k = kπ/N, and γ₊ at the same nodes.
  std::vector<double> s_nodes;
  std::vector<double> gamma_nodes;

  double w(double zeta) const {
    const double a = 2.0 * shape.M(zeta) * std::sin(zeta);
    return 0.5 * std::sqrt(1.0 + a * a);
  }

  double beta(double zeta) const { return beta_of_zeta(shape.M(zeta), zeta); }

  double dbeta_dzeta(double zeta) const {
    const double M = shape.M(zeta), s = std::sin(zeta);
    const double a = 2.0 * M * s;
    return -(2.0 * shape.M_prime(zeta) * s + 2.0 * M * std::cos(zeta)) / (1.0 + a * a);
  }

  // cot β / sin ζ, which tends to 2M at the ends.
  double cot_beta_over_sin(double zeta) const {
    const double s = std::sin(zeta);
    if (std::abs(s) < 1e-12) return 2.0 * shape.M(zeta);
    const double b = beta(zeta);
    return std::cos(b) / std::sin(b) / s;
  }

  double gamma_rate(double zeta) const { return 0.5 * (dbeta_dzeta(zeta) - cot_beta_over_sin(zeta)); }

  static double node(std::size_t k) { return kPi * static_cast<double>(k) / kPanels; }

  void build_tables() {
    s_nodes.assign(kPanels + 1, 0.0);
    gamma_nodes.assign(kPanels + 1, 0.0);
    for (std::size_t k = 0; k < kPanels; ++k) {
      const double a = node(k), b = node(k + 1);
      s_nodes[k + 1] = s_nodes[k] + Gauss::integrate([this](double x) { return w(x); }, a, b);
      gamma_nodes[k + 1] = gamma_nodes[k] + Gauss::integrate([this](double x) { return gamma_rate(x); }, a, b);
    }
    bound = s_nodes.back();
  }

  std::size_t panel_of(double zeta) const {
    const double u = zeta / kPi * kPanels;
    if (!(u > 0.0)) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(u), kPanels - 1);
  }

  double s_of_zeta(double zeta) const {
    const std::size_t k = panel_of(zeta);
    return s_nodes[k] + Gauss::integrate([this](double x) { return w(x); }, node(k), zeta);
  }

  double gamma_of_zeta(double zeta) const {
    const std::size_t k = panel_of(zeta);
    return gamma_nodes[k] + Gauss::integrate([this](double x) { return gamma_rate(x); }, node(k), zeta);
  }

  double zeta_of_s(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= bound) return kPi;
    const auto it = std::upper_bound(s_nodes.begin(), s_nodes.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - s_nodes.begin()) - 1;
    const double lo = node(k), hi = node(k + 1);
    // Linear seed inside a monotone panel, then safeguarded Newton on s(ζ) − s.
    double zeta = lo + (hi - lo) * (s - s_nodes[k]) / (s_nodes[k + 1] - s_nodes[k]);
    for (int it_n = 0; it_n < 20; ++it_n) {
      const double f = s_of_zeta(zeta) - s;
      const double step = f / w(zeta);
      zeta = std::clamp(zeta - step, lo, hi);
      if (std::abs(step) < 1e-15 * (1.0 + zeta)) break;
    }
    return zeta;
  }

  double zeta_at(double z) const { return zeta_of_s(q0 * z); }
};

InvariantDesign::InvariantDesign(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

double InvariantDesign::bound_value_for(const std::vector<double>& coeffs) {
  Impl impl;
  impl.shape = FourierShape(coeffs);
  impl.build_tables();
  return impl.bound;
}

InvariantDesign InvariantDesign::solve(std::vector<double> coeffs, std::optional<double> q0,
                                       std::optional<double> length) {
  if (q0.has_value() == length.has_value()) {
    throw ContractError("exactly one of q0 and length must be supplied");
  }
  auto impl = std::make_shared<Impl>();
  impl->shape = FourierShape(std::move(coeffs));
  impl->build_tables();
  if (!std::isfinite(impl->bound) || !(impl->bound > 0.0)) throw DesignError("bound integral is not finite");
  if (q0) {
    if (!(*q0 > 0.0) || !std::isfinite(*q0)) throw ContractError("q0 must be positive");
    impl->q0 = *q0;
    impl->length = impl->bound / *q0;
  } else {
    if (!(*length > 0.0) || !std::isfinite(*length)) throw ContractError("length must be positive");
    impl->length = *length;
    impl->q0 = impl->bound / *length;
  }
  return InvariantDesign(std::move(impl));
}

const std::vector<double>& InvariantDesign::coeffs() const { return impl_->shape.coeffs(); }
double InvariantDesign::q0() const { return impl_->q0; }
double InvariantDesign::length() const { return impl_->length; }
double InvariantDesign::bound_value() const { return impl_->bound; }
double InvariantDesign::bound_minimum() { return 0.5 * kPi; }

double InvariantDesign::zeta(double z) const { return impl_->zeta_at(z); }
double InvariantDesign::beta(double z) const { return impl_->beta(zeta(z)); }

double InvariantDesign::zeta_dot(double z) const { return impl_->q0 / impl_->w(zeta(z)); }

double InvariantDesign::beta_dot(double z) const {
  const double zt = zeta(z);
  return impl_->dbeta_dzeta(zt) * impl_->q0 / impl_->w(zt);
}

double InvariantDesign::delta_k_opt(double z) const {
  const double zt = zeta(z);
  const double b = impl_->beta(zt);
  const double bd = impl_->dbeta_dzeta(zt) * impl_->q0 / impl_->w(zt);
  return -bd + 4.0 * impl_->q0 * impl_->shape.M(zt) * std::cos(zt) * std::sin(b);
}

double InvariantDesign::m_of_zeta(double zeta) const { return impl_->shape.m(zeta); }
double InvariantDesign::big_m(double zeta) const { return impl_->shape.M(zeta); }

double InvariantDesign::gamma_plus(double z) const { return impl_->gamma_of_zeta(zeta(z)); }

double InvariantDesign::gamma_plus_dot(double z) const {
  const double zt = zeta(z);
  return impl_->gamma_rate(zt) * impl_->q0 / impl_->w(zt);
}

ModeState InvariantDesign::invariant_eigenstate(double z) const {
  const double zt = zeta(z), b = impl_->beta(zt);
  return {std::complex<double>(std::cos(0.5 * zt), 0.0), std::polar(std::sin(0.5 * zt), -b)};
}

ModeState InvariantDesign::lr_solution(double z) const {
  const ModeState phi = invariant_eigenstate(z);
  const std::complex<double> g = std::polar(1.0, gamma_plus(z));
  return {g * phi.a1, g * phi.a3};
}

std::array<double, 3> InvariantDesign::invariant_axis(double z) const {
  const double zt = zeta(z), b = impl_->beta(zt);
  return {std::sin(zt) * std::cos(b), -std::sin(zt) * std::sin(b), std::cos(zt)};
}

double InvariantDesign::invariant_expectation(double z, const ModeState& state) const {
  const auto n = invariant_axis(z);
  const BlochVector v = bloch_vector(state);
  return n[0] * v.x + n[1] * v.y + n[2] * v.z;
}

InvarianceResiduals InvariantDesign::residuals(std::size_t grid) const {
  grid = std::max<std::size_t>(grid, 3);
  const double L = impl_->length, q = impl_->q0;
  const double h = 5e-5 * L;
  auto d5 = [h](auto&& f, double z) {
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h);
  };
  auto zf = [this](double z) { return zeta(z); };
  auto bf = [this](double z) { return beta(z); };
  InvarianceResiduals r;
  for (std::size_t i = 0; i < grid; ++i) {
    const double z = 2 * h + (L - 4 * h) * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double zt = zeta(z), b = beta(z);
    const double rz = d5(zf, z) - 2.0 * q * std::sin(b);
    const double rb = d5(bf, z) + delta_k_opt(z) - 2.0 * q * std::cos(zt) / std::sin(zt) * std::cos(b);
    r.zeta_rate = std::max(r.zeta_rate, std::abs(rz));
    r.beta_rate = std::max(r.beta_rate, std::abs(rb));
  }
  return r;
}

DriveProfile InvariantDesign::profile() const {
  const InvariantDesign self = *this;
  const double q = impl_->q0;
  DriveProfile p("lz_optimal", impl_->length, [self](double z) { return self.delta_k_opt(z); },
                 [q](double) { return q; });
  p = p.with_parameter("q0_per_mm", q).with_parameter("bound_value", impl_->bound);
  const auto& c = coeffs();
  for (std::size_t n = 0; n < c.size(); ++n) p = p.with_parameter("c" + std::to_string(n + 1), c[n]);
  return p;
}

DriveProfile InvariantDesign::lr_frame_profile() const {
  const InvariantDesign self = *this;
  const double q = impl_->q0;
  return DriveProfile(
      "lz_optimal_lr_frame", impl_->length,
      [self](double z) { return self.delta_k_opt(z) - 2.0 * self.gamma_plus_dot(z); },
      [q](double) { return q; });
}

InvariantDesign solve_zeta(std::vector<double> coeffs, std::optional<double> q0,
                           std::optional<double> length) {
  return InvariantDesign::solve(std::move(coeffs), q0, length);
}

LZOptimalResult design_lz_optimal(std::vector<double> coeffs, double q0, double length) {
  if (!(q0 > 0.0) || !(length > 0.0)) throw ContractError("q0 and length must be positive");
  const double bound = InvariantDesign::bound_value_for(coeffs);
  if (std::abs(q0 * length - bound) > 1e-6 * bound) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "Q0*L = " << q0 * length << " violates the bound relation (needs " << bound
        << "): consistent length for q0 = " << q0 << " is " << bound / q0
        << " mm, consistent q0 for length = " << length << " is " << bound / length << " /mm";
    throw ContractError(msg.str());
  }
  InvariantDesign d = InvariantDesign::solve(std::move(coeffs), q0, std::nullopt);
  return {d.profile(), d};
}

std::complex<double> error_integral(const InvariantDesign& design) {
  // Integrate in ζ: dz = w(ζ)/Q₀ dζ, and on the chosen branch 2γ₊ − β = −m(ζ) − π/2,
  // but use the tabulated γ₊ so the result follows the quadrature actually in use.
  const auto& impl = *design.impl_;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto phase = [&impl](double zt) { return 2.0 * impl.gamma_of_zeta(zt) - impl.beta(zt); };
  auto weight = [&impl](double zt) { return std::sin(zt) * impl.w(zt) / impl.q0; };
  const double re = GK::integrate([&](double zt) { return weight(zt) * std::cos(phase(zt)); }, 0.0, kPi, 15, 1e-12);
  const double im = GK::integrate([&](double zt) { return weight(zt) * std::sin(phase(zt)); }, 0.0, kPi, 15, 1e-12);
  return {re, im};
}

ErrorSensitivity error_sensitivity_for_detuning(const InvariantDesign& design, double delta_per_mm) {
  const double j2 = std::norm(error_integral(design));
  ErrorSensitivity e;
  e.delta = delta_per_mm;
  e.p_plus = 1.0 - 0.25 * delta_per_mm * delta_per_mm * j2;
  e.q_delta = -0.25 * j2;
  return e;
}

ErrorSensitivity error_sensitivity(const InvariantDesign& design, double delta_lambda1_um, double n1,
                                   double lambda1_um) {
  if (!(lambda1_um > 0.0)) throw ContractError("wavelength must be positive");
  const double delta = -2.0 * kPi * n1 * delta_lambda1_um / (lambda1_um * lambda1_um) * 1e3;
  return error_sensitivity_for_detuning(design, delta);
}

C1Optimum optimize_c1(double fixed_value, BoundUnknown unknown, double lo, double hi,
                      std::size_t scan_points, double tolerance) {
  if (!(hi > lo)) throw ContractError("c1 search interval is empty");
  if (!(fixed_value > 0.0)) throw ContractError("fixed q0/length must be positive");
  scan_points = std::max<std::size_t>(scan_points, 3);
  auto build = [&](double c1) {
    return unknown == BoundUnknown::length ? InvariantDesign::solve({c1}, fixed_value, std::nullopt)
                                           : InvariantDesign::solve({c1}, std::nullopt, fixed_value);
  };
  auto row = [&](double c1) {
    const InvariantDesign d = build(c1);
    return C1ScanRow{c1, std::abs(error_integral(d)), d.q0(), d.length()};
  };

  C1Optimum out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < scan_points; ++i) {
    const double c1 = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    out.scan.push_back(row(c1));
    if (out.scan[i].abs_integral < out.scan[best].abs_integral) best = i;
  }

  double a = out.scan[best > 0 ? best - 1 : 0].c1;
  double b = out.scan[std::min(best + 1, scan_points - 1)].c1;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = row(x1).abs_integral, f2 = row(x2).abs_integral;
  while (b - a > tolerance) {
    if (f1 < f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - g * (b - a), f1 = row(x1).abs_integral;
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + g * (b - a), f2 = row(x2).abs_integral;
    }
  }
  C1ScanRow fin = row(0.5 * (a + b));
  if (out.scan[best].abs_integral < fin.abs_integral) fin = out.scan[best];
  out.c1 = fin.c1;
  out.abs_integral = fin.abs_integral;
  out.q0 = fin.q0;
  out.length = fin.length;
  out.at_boundary = best == 0 || best == scan_points - 1;
  if (out.at_boundary) out.warning = "no interior minimum of |J| in the c1 interval; optimum at its boundary";
  return out;
}

}  // namespace sfg
