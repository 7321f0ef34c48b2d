#include <cmath>
#include <limits>
#include <numbers>

#include "sfgsta/errors.hpp"
#include "sfgsta/profiles.hpp"

namespace sfg {

bool AdiabaticLZDesign::avoided_crossing() const { return delta_k(0.0) * delta_k(length) < 0.0; }

double AdiabaticLZDesign::poling_period_um(double z) const {
  const double k = grating_reference - delta_k(z);
  if (grating_reference == 0.0 || !(k > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * std::numbers::pi / k * 1e3;
}

AdiabaticLZDesign make_lz_design(double delta0, double alpha, double q0, double length) {
  if (!(length > 0.0)) throw ContractError("sweep length must be positive");
  if (!(q0 >= 0.0)) throw ContractError("coupling must be non-negative");
  if (!std::isfinite(delta0) || !std::isfinite(alpha)) throw ContractError("sweep must be finite");
  AdiabaticLZDesign d;
  d.delta0 = delta0;
  d.alpha = alpha;
  d.q0 = q0;
  d.length = length;
  if (!d.avoided_crossing()) {
    d.warnings.push_back("no avoided crossing inside the crystal: dK(z) does not change sign");
  }
  return d;
}

AdiabaticResult design_adiabatic(const CrystalSpec& crystal, const OpticalSetup& setup,
                                 const AdiabaticOptions& options) {
  crystal.validate();
  setup.validate();
  const double k_initial = poling_wavevector(crystal.poling_initial_um);
  const double k_final = poling_wavevector(crystal.poling_final_um);
  const double length = crystal.length_mm;
  // ΔK(z) = ΔK₀ + δK − K(z) with K linear in z, so α = (K_f − K_i)/L.
  const double alpha = (k_final - k_initial) / length;
  if (!std::isfinite(alpha)) throw DesignError("LZ slope is not finite");
  const double dk0 = primary_phase_mismatch(setup);
  const double q0 = coupling_from_intensity(setup);

  double delta0 = 0.0;
  double reference = 0.0;
  if (options.auto_center) {
    delta0 = 0.5 * alpha * length;
    reference = k_initial + delta0;
  } else {
    reference = dk0 + crystal.delta_k_gvm_per_mm;
    delta0 = reference - k_initial;
  }
  AdiabaticLZDesign d = make_lz_design(delta0, alpha, q0, length);
  d.grating_reference = reference;
  d.delta_k0 = dk0;
  return {lz_profile(d), d};
}

DriveProfile lz_profile(const AdiabaticLZDesign& d) {
  const double delta0 = d.delta0, alpha = d.alpha, q0 = d.q0;
  return DriveProfile(
             "adiabatic", d.length, [delta0, alpha](double z) { return delta0 - alpha * z; },
             [q0](double) { return q0; })
      .with_slope([alpha](double) { return -alpha; })
      .with_parameter("delta0_per_mm", delta0)
      .with_parameter("alpha_per_mm2", alpha)
      .with_parameter("q0_per_mm", q0);
}

}  // namespace sfg
