#include <algorithm>
#include <cmath>

#include "sfgsta/errors.hpp"
#include "sfgsta/profiles.hpp"

namespace sfg {

double mixing_angle(double delta_k, double q) {
  if (delta_k == 0.0 && q == 0.0) throw SingularityError("mixing angle undefined for Q = dK = 0");
  return std::atan2(2.0 * q, delta_k);
}

CDDesign::CDDesign(AdiabaticLZDesign base) : base_(std::move(base)) {
  if (base_.alpha == 0.0) throw ContractError("counter-diabatic design needs a chirped sweep (alpha != 0)");
  if (!(base_.q0 > 0.0)) throw ContractError("counter-diabatic design needs Q0 > 0");
}

double CDDesign::theta(double z) const { return mixing_angle(base_.delta_k(z), base_.q0); }

double CDDesign::theta_dot(double z) const {
  const double dk = base_.delta_k(z), q = base_.q0;
  return 2.0 * q * base_.alpha / (dk * dk + 4.0 * q * q);
}

double CDDesign::theta_ddot(double z) const {
  const double dk = base_.delta_k(z), q = base_.q0;
  const double d = dk * dk + 4.0 * q * q;
  return 4.0 * q * base_.alpha * base_.alpha * dk / (d * d);
}

double CDDesign::phi(double z) const { return std::atan(theta_dot(z) / (2.0 * base_.q0)); }

double CDDesign::phi_dot(double z) const {
  const double r = theta_dot(z) / (2.0 * base_.q0);
  return theta_ddot(z) / (2.0 * base_.q0) / (1.0 + r * r);
}

double CDDesign::q_eff(double z) const {
  const double td = theta_dot(z);
  return std::sqrt(base_.q0 * base_.q0 + 0.25 * td * td);
}

double CDDesign::delta_k_eff(double z) const { return base_.delta_k(z) - phi_dot(z); }

DriveProfile CDDesign::effective_profile() const {
  const CDDesign self = *this;
  return DriveProfile(
             "cd", base_.length, [self](double z) { return self.delta_k_eff(z); },
             [self](double z) { return self.q_eff(z); })
      .with_parameter("delta0_per_mm", base_.delta0)
      .with_parameter("alpha_per_mm2", base_.alpha)
      .with_parameter("q0_per_mm", base_.q0);
}

DriveProfile CDDesign::two_field_profile() const {
  const CDDesign self = *this;
  return lz_profile(base_).with_coupling_y([self](double z) { return 0.5 * self.theta_dot(z); });
}

DriveProfile CDDesign::reference_profile() const { return lz_profile(base_); }

double CDDesign::max_q_eff(std::size_t grid) const {
  grid = std::max<std::size_t>(grid, 2);
  double best = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    best = std::max(best, q_eff(base_.length * static_cast<double>(i) / static_cast<double>(grid - 1)));
  }
  // ϑ̇ peaks where ΔK = 0; include that point when it lies in the crystal.
  if (base_.alpha != 0.0) {
    const double zc = base_.delta0 / base_.alpha;
    if (zc >= 0.0 && zc <= base_.length) best = std::max(best, q_eff(zc));
  }
  return best;
}

CDResult design_cd(const AdiabaticLZDesign& base) {
  CDDesign d(base);
  return {d, d.effective_profile()};
}

}  // namespace sfg
