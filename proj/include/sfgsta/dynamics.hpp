#pragma once

// Propagation of the undepleted-pump two-mode system along the crystal.
//
// Rotating frame: i d/dz (a₁, a₃)ᵀ = H(z) (a₁, a₃)ᵀ with
//   H(z) = ΔK(z)/2 σ_z + Q(z) σ_x + Q_y(z) σ_y,
// where Q_y is only non-zero for the two-field counter-diabatic form.

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sfg {

struct ModeState {
  std::complex<double> a1{1.0, 0.0};
  std::complex<double> a3{0.0, 0.0};

  double signal_population() const { return std::norm(a1); }
  double idler_population() const { return std::norm(a3); }
  double norm_squared() const { return std::norm(a1) + std::norm(a3); }
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩) with the pure signal mode at the north pole.
BlochVector bloch_vector(const ModeState& state);

/// z-dependent drive (ΔK(z), Q(z)) on [0, L]. Immutable; the with_* and
/// shifted members return modified copies that share the captured callables.
class DriveProfile {
 public:
  using Field = std::function<double(double)>;

  DriveProfile(std::string scheme, double length_mm, Field delta_k, Field coupling);

  const std::string& scheme() const { return scheme_; }
  double length() const { return length_; }

  double delta_k(double z) const { return delta_k_(z) + offset_; }
  double coupling(double z) const { return coupling_(z); }
  double coupling_y(double z) const { return coupling_y_ ? coupling_y_(z) : 0.0; }
  bool has_coupling_y() const { return static_cast<bool>(coupling_y_); }

  /// ∂_zΔK, analytic when provided, otherwise a central difference with step L·1e-6.
  double delta_k_slope(double z) const;
  bool has_analytic_slope() const { return static_cast<bool>(slope_); }

  DriveProfile with_slope(Field slope) const;
  DriveProfile with_coupling_y(Field coupling_y) const;
  DriveProfile with_parameter(const std::string& key, double value) const;
  /// Uniform mismatch offset, e.g. a wavelength or temperature detuning.
  DriveProfile shifted(double delta_k_offset) const;

  double offset() const { return offset_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }

 private:
  std::string scheme_;
  double length_;
  Field delta_k_;
  Field coupling_;
  Field coupling_y_;
  Field slope_;
  double offset_ = 0.0;
  std::map<std::string, double> parameters_;
};

struct Trajectory {
  std::vector<double> z;
  std::vector<ModeState> states;
  double norm_drift = 0.0;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;

  const ModeState& initial() const { return states.front(); }
  const ModeState& final_state() const { return states.back(); }
};

struct PropagationOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::size_t samples = 501;  // raised to 501 when smaller
};

Trajectory propagate(const DriveProfile& profile, const ModeState& initial = {},
                     const PropagationOptions& options = {});

/// Integrates the lab-frame coupled-mode equations
///   dÃ₁/dz = −i q Ã₃ e^{−iΦ},  dÃ₃/dz = −i q* Ã₁ e^{iΦ},  Φ(z) = ∫₀ᶻ ΔK,
/// returning Ã amplitudes. Populations coincide with the rotating frame.
Trajectory propagate_original_frame(std::complex<double> q, const std::function<double(double)>& mismatch,
                                    double length_mm, const ModeState& initial = {},
                                    const PropagationOptions& options = {});

/// |Q ∂_zΔK| / (Q² + ΔK²)^{3/2}.
double adiabaticity_measure(const DriveProfile& profile, double z);

struct AdiabaticityPeak {
  double value = 0.0;
  double z = 0.0;
};
AdiabaticityPeak max_adiabaticity(const DriveProfile& profile, std::size_t grid = 2001);

/// |a₃(L)|² / |a₁(0)|²; the trajectory must start in the pure signal mode.
double efficiency(const Trajectory& trajectory);

/// |⟨ψ(z)|n(z)⟩|² per sample, with n(z) the instantaneous eigenvector of the
/// profile's Hamiltonian continuously connected to the one that best matches
/// the initial state.
std::vector<double> eigenstate_fidelity(const DriveProfile& profile, const Trajectory& trajectory);

/// CSV: z_mm, re_a1, im_a1, re_a3, im_a3, pop1, pop3, bloch_x, bloch_y, bloch_z.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace sfg
