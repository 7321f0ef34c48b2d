#pragma once

// Drive-design schemes: adiabatic Landau–Zener sweep, counter-diabatic
// driving, and invariant-based constant-coupling (LZ-optimal) design.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sfgsta/dynamics.hpp"
#include "sfgsta/materials.hpp"

namespace sfg {

// ---------------------------------------------------------------------------
// Adiabatic Landau–Zener sweep

/// Linear sweep ΔK(z) = Δ₀ − αz at constant coupling Q₀.
struct AdiabaticLZDesign {
  double delta0 = 0.0;  // mm⁻¹
  double alpha = 0.0;   // mm⁻²
  double q0 = 0.0;      // mm⁻¹
  double length = 0.0;  // mm
  /// Local grating wavevector is grating_reference − ΔK(z); zero when the
  /// design was not built from a crystal.
  double grating_reference = 0.0;
  double delta_k0 = 0.0;  // baseline primary mismatch the crystal was designed for
  std::vector<std::string> warnings;

  double delta_k(double z) const { return delta0 - alpha * z; }
  bool avoided_crossing() const;
  /// Poling period Λ(z) in µm implied by the grating reference.
  double poling_period_um(double z) const;
};

/// Builds a design directly from sweep parameters (no crystal bookkeeping).
AdiabaticLZDesign make_lz_design(double delta0, double alpha, double q0, double length);

struct AdiabaticOptions {
  /// Centre the sweep symmetrically (ΔK from +Δ₀ to −Δ₀) by absorbing the
  /// fixed offset ΔK₀ + δK into the fabricated grating.
  bool auto_center = true;
};

struct AdiabaticResult {
  DriveProfile profile;
  AdiabaticLZDesign design;
};

AdiabaticResult design_adiabatic(const CrystalSpec& crystal, const OpticalSetup& setup,
                                 const AdiabaticOptions& options = {});
DriveProfile lz_profile(const AdiabaticLZDesign& design);

// ---------------------------------------------------------------------------
// Counter-diabatic driving

/// Mixing angle ϑ = atan2(2q, ΔK) ∈ (0, π) for q > 0.
double mixing_angle(double delta_k, double q);

/// Counter-diabatic correction of a linear LZ sweep.
///
/// The CD field (ϑ̇/2)σ_y cancels non-adiabatic coupling exactly. Rotating by
/// φ = atan(ϑ̇/(2Q₀)) about σ_z turns Q₀σ_x + (ϑ̇/2)σ_y into a single
/// σ_x drive Q_eff = sqrt(Q₀² + ϑ̇²/4) with mismatch ΔK_eff = ΔK − φ̇.
class CDDesign {
 public:
  explicit CDDesign(AdiabaticLZDesign base);

  const AdiabaticLZDesign& base() const { return base_; }

  double theta(double z) const;
  double theta_dot(double z) const;
  double theta_ddot(double z) const;
  double phi(double z) const;
  double phi_dot(double z) const;
  double q_eff(double z) const;
  double delta_k_eff(double z) const;

  /// (ΔK_eff, Q_eff): the single-field drive a crystal would implement.
  DriveProfile effective_profile() const;
  /// H + H₁: the reference sweep plus the σ_y counter-diabatic field.
  DriveProfile two_field_profile() const;
  /// The uncorrected reference sweep whose eigenstates are tracked.
  DriveProfile reference_profile() const;

  /// Largest Q_eff on a uniform grid (attained at the sweep centre for LZ).
  double max_q_eff(std::size_t grid = 4001) const;

 private:
  AdiabaticLZDesign base_;
};

struct CDResult {
  CDDesign design;
  DriveProfile profile;  // effective single-field drive
};

CDResult design_cd(const AdiabaticLZDesign& base);

// ---------------------------------------------------------------------------
// Invariant-based constant-coupling design

/// m(ζ) = 2ζ + Σ cₙ sin(2nζ) and M = (1/2) dm/dζ = 1 + Σ n cₙ cos(2nζ).
class FourierShape {
 public:
  explicit FourierShape(std::vector<double> coeffs = {});

  const std::vector<double>& coeffs() const { return coeffs_; }
  double m(double zeta) const;
  double M(double zeta) const;
  /// dM/dζ.
  double M_prime(double zeta) const;

 private:
  std::vector<double> coeffs_;
};

FourierShape build_m(std::vector<double> coeffs);

/// β on the finite-length branch cot β = 2M sin ζ, i.e. β = π/2 − atan(2M sin ζ).
///
/// On this branch sin β = 1/sqrt(1 + 4M² sin²ζ) never vanishes, so
/// dz/dζ = 1/(2Q₀ sin β) stays finite at ζ ∈ {0, π}. The alternative
/// cot β = 1/(2M sin ζ) makes z(ζ) diverge logarithmically at both ends.
double beta_of_zeta(double M, double zeta);

/// Which of (Q₀, L) solve_zeta derives from the bound relation.
enum class BoundUnknown { length, q0 };

struct InvarianceResiduals {
  double zeta_rate = 0.0;  // max |ζ̇ − 2Q₀ sin β|
  double beta_rate = 0.0;  // max |β̇ + ΔK − 2Q₀ cot ζ cos β|
  double max() const { return zeta_rate > beta_rate ? zeta_rate : beta_rate; }
};

class InvariantDesign {
 public:
  /// Solves ζ(z) for the given Fourier coefficients with exactly one of
  /// q0 / length supplied; the other follows from Q₀L = ∫₀^π w(ζ) dζ,
  /// w = (1/2) sqrt(1 + 4M² sin²ζ).
  static InvariantDesign solve(std::vector<double> coeffs, std::optional<double> q0,
                               std::optional<double> length);

  /// Dimensionless Q₀L for a coefficient set.
  static double bound_value_for(const std::vector<double>& coeffs);

  const std::vector<double>& coeffs() const;
  double q0() const;
  double length() const;
  /// Q₀L.
  double bound_value() const;
  /// π/2: the c = 0 integrand satisfies w ≥ 1/2.
  static double bound_minimum();

  double zeta(double z) const;
  double beta(double z) const;
  double zeta_dot(double z) const;
  double beta_dot(double z) const;
  double delta_k_opt(double z) const;
  double m_of_zeta(double zeta) const;
  double big_m(double zeta) const;

  /// LR phase γ₊(z), obtained by quadrature of
  /// γ̇₊ = (β̇ − ζ̇ cot β / sin ζ) / 2 with γ₊(0) = 0.
  double gamma_plus(double z) const;
  double gamma_plus_dot(double z) const;

  /// Invariant eigenvector |Φ₊⟩ = (cos ζ/2, e^{−iβ} sin ζ/2).
  ModeState invariant_eigenstate(double z) const;
  /// Exact solution e^{iγ₊}|Φ₊⟩ of the designed dynamics.
  ModeState lr_solution(double z) const;
  /// Bloch axis (sin ζ cos β, −sin ζ sin β, cos ζ) of the invariant I(z) with I₀ = 1.
  std::array<double, 3> invariant_axis(double z) const;
  /// ⟨ψ|I(z)|ψ⟩.
  double invariant_expectation(double z, const ModeState& state) const;

  /// Residuals of the invariance conditions, checked by finite differences
  /// of ζ(z) and β(z) on `grid` interior points.
  InvarianceResiduals residuals(std::size_t grid = 401) const;

  /// ΔK_opt(z) with constant Q₀.
  DriveProfile profile() const;
  /// Same dynamics in the frame rotated by γ₊σ_z: ΔK_opt − 2γ̇₊.
  DriveProfile lr_frame_profile() const;

 private:
  struct Impl;
  friend std::complex<double> error_integral(const InvariantDesign& design);
  explicit InvariantDesign(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

InvariantDesign solve_zeta(std::vector<double> coeffs, std::optional<double> q0,
                           std::optional<double> length);

struct LZOptimalResult {
  DriveProfile profile;
  InvariantDesign design;
};

/// Requires Q₀L to match the bound relation to 1e-6 relative; otherwise throws
/// ContractError naming the consistent length and coupling.
LZOptimalResult design_lz_optimal(std::vector<double> coeffs, double q0, double length);

/// ∫₀^L sin ζ e^{i m(z)} dz with m(z) = 2γ₊ − β.
std::complex<double> error_integral(const InvariantDesign& design);

struct ErrorSensitivity {
  double delta = 0.0;    // mm⁻¹
  double p_plus = 1.0;   // survival probability in the designed mode
  double q_delta = 0.0;  // −(1/2)|∂²P₊/∂δ²|
};

/// Wavelength error δ = −2π n₁ δλ₁ / λ₁² and its second-order effect.
ErrorSensitivity error_sensitivity(const InvariantDesign& design, double delta_lambda1_um, double n1,
                                   double lambda1_um);
/// Same, for a mismatch error already expressed in mm⁻¹.
ErrorSensitivity error_sensitivity_for_detuning(const InvariantDesign& design, double delta_per_mm);

struct C1ScanRow {
  double c1 = 0.0;
  double abs_integral = 0.0;
  double q0 = 0.0;
  double length = 0.0;
};

struct C1Optimum {
  double c1 = 0.0;
  double abs_integral = 0.0;
  double q0 = 0.0;
  double length = 0.0;
  std::vector<C1ScanRow> scan;
  bool at_boundary = false;
  std::string warning;
};

/// Coarse scan of c₁ on `scan_points` nodes, then golden-section refinement
/// of |error_integral| in the best bracket. `fixed` states which of Q₀/L is
/// held: the other is re-derived per candidate from the bound relation.
C1Optimum optimize_c1(double fixed_value, BoundUnknown unknown, double lo, double hi,
                      std::size_t scan_points = 31, double tolerance = 1e-9);

}  // namespace sfg
