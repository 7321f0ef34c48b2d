#pragma once

// Dispersion and coupling physics for three-wave mixing in a poled crystal.
//
// Canonical units: wavelengths in µm, temperature in °C, wavevectors and
// couplings in mm⁻¹, lengths in mm, intensities in MW/cm², χ⁽²⁾ in pm/V.

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace sfg {

/// Sellmeier and thermal-dispersion coefficients of one crystal axis.
///
/// n²(λ) = A + B / (1 − C/λ²) − Dλ² at the 25 °C reference, and
/// Δn(λ, T) = n₁(λ)(T − 25) + n₂(λ)(T − 25)² with n_j(λ) = Σ_m a_j[m] / λ^m.
struct MaterialModel {
  std::string name;
  std::string source;
  double sellmeier_a = 0.0;
  double sellmeier_b = 0.0;
  double sellmeier_c = 0.0;  // µm²
  double sellmeier_d = 0.0;  // µm⁻²
  std::array<double, 4> thermal_a1{};
  std::array<double, 4> thermal_a2{};
  double band_min_um = 0.0;
  double band_max_um = 0.0;
};

/// Parses the material JSON document; throws ValidationError naming the
/// offending field (or the line/column of a syntax error).
MaterialModel parse_material(std::string_view json_text);
MaterialModel load_material(const std::filesystem::path& path);

inline constexpr double kReferenceTemperatureC = 25.0;

double sellmeier_index(const MaterialModel& material, double lambda_um);
double thermal_index_shift(const MaterialModel& material, double lambda_um, double temperature_c);
double refractive_index(const MaterialModel& material, double lambda_um, double temperature_c);

/// k = 2πn/λ in mm⁻¹.
double wavenumber(double n, double lambda_um);

/// Idler from energy conservation ω₃ = ω₁ + ω₂.
double idler_wavelength(double lambda1_um, double lambda2_um);

/// Grating wavevector 2π/Λ in mm⁻¹; an infinite period gives 0.
double poling_wavevector(double period_um);

struct OpticalSetup {
  double lambda1_um = 1.535;  // signal
  double lambda2_um = 1.064;  // pump
  double temperature_c = kReferenceTemperatureC;
  double pump_intensity_mw_cm2 = 0.0;
  double chi2_pm_v = 32.0;
  std::shared_ptr<const MaterialModel> material;

  double lambda3_um() const { return idler_wavelength(lambda1_um, lambda2_um); }
  void validate() const;
};

struct CrystalSpec {
  double length_mm = 20.0;
  double poling_initial_um = 16.2;
  double poling_final_um = 14.6;
  double delta_k_gvm_per_mm = 0.0;

  void validate() const;
};

/// ΔK₀ = k₁ + k₂ − k₃ along the extraordinary axis at the setup temperature.
double primary_phase_mismatch(const OpticalSetup& setup);

/// Q₀ in mm⁻¹ from the pump intensity (SI bookkeeping, χ⁽²⁾ squared).
double coupling_from_intensity(const OpticalSetup& setup);

/// The algebraic pair behind coupling_from_intensity and its inverse.
/// Wavelengths in µm, χ⁽²⁾ in pm/V, intensity in MW/cm², Q in mm⁻¹.
double coupling_for_intensity(double intensity_mw_cm2, double chi2_pm_v, double lambda1_um,
                              double lambda3_um, double n1, double n3);
double intensity_for_coupling(double q0_per_mm, double chi2_pm_v, double lambda1_um,
                              double lambda3_um, double n1, double n3);

}  // namespace sfg
