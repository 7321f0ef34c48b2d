#pragma once

// Efficiency sweeps over signal wavelength or crystal temperature.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfgsta/dynamics.hpp"
#include "sfgsta/materials.hpp"
#include "sfgsta/profiles.hpp"

namespace sfg {

enum class Scheme { adiabatic, cd, lz_optimal };
enum class SweepAxis { signal_wavelength, temperature };

std::string to_string(Scheme scheme);
std::string to_string(SweepAxis axis);
Scheme parse_scheme(const std::string& text);
SweepAxis parse_axis(const std::string& text);
/// Column name of the axis in CSV output.
std::string axis_column(SweepAxis axis);

/// A curve of the sweep: overrides of the baseline pump intensity, crystal
/// length or first Fourier coefficient.
struct SweepFamily {
  std::string label;
  std::optional<double> pump_intensity_mw_cm2;
  std::optional<double> length_mm;
  std::optional<double> c1;
};

struct SweepSpec {
  Scheme scheme = Scheme::adiabatic;
  SweepAxis axis = SweepAxis::signal_wavelength;
  double lo = 1.40;
  double hi = 1.70;
  std::size_t points = 121;
  OpticalSetup setup;
  CrystalSpec crystal;
  std::vector<SweepFamily> families;
  bool design_frozen = true;
  /// LZ-optimal only: baseline Fourier coefficients and the quantity taken
  /// from the bound relation (length: Q₀ from the pump; q0: L from the crystal).
  std::vector<double> lz_coeffs{-1.47};
  BoundUnknown lz_unknown = BoundUnknown::q0;

  void validate() const;
  std::vector<double> axis_values() const;
  /// Defaults for an axis: 1.40–1.70 µm / 121 points, 0–100 °C / 101 points.
  static SweepSpec with_default_axis(SweepAxis axis);
};

struct SweepResult {
  SweepSpec spec;
  std::vector<double> axis_values;
  std::vector<std::string> labels;
  /// [family][point]; NaN where the point could not be evaluated.
  std::vector<std::vector<double>> efficiency;
  std::vector<std::vector<double>> max_adiabaticity;
  std::vector<std::vector<double>> norm_drift;
  std::vector<std::vector<std::string>> failure;
  nlohmann::json provenance;

  std::size_t missing() const;
};

/// Evaluates every (family, point) pair on `workers` threads. Output does not
/// depend on the worker count.
SweepResult run_sweep(const SweepSpec& spec, const PropagationOptions& options = {}, std::size_t workers = 1);

/// Pump intensity (MW/cm²) that yields coupling q0 at signal wavelength λ₁.
double pump_for_constant_coupling(double q0_per_mm, double lambda1_um, const OpticalSetup& setup);

struct TemperatureRow {
  double temperature_c = 0.0;
  double delta_k0 = 0.0;         // mm⁻¹
  double detuning = 0.0;         // ΔK₀(T) − ΔK₀(T_setup)
  double detuning_over_span = 0.0;  // relative to the grating sweep |K_f − K_i|
};

struct MonotoneSegment {
  double from_c = 0.0;
  double to_c = 0.0;
  int sign = 0;  // +1 increasing, −1 decreasing
};

struct TemperatureReport {
  std::vector<TemperatureRow> rows;
  /// ΔK₀ ≈ c0 + c1 u + c2 u², u = T − 25 °C.
  double fit_c0 = 0.0, fit_c1 = 0.0, fit_c2 = 0.0;
  double fit_max_residual = 0.0;
  std::vector<MonotoneSegment> segments;
};

TemperatureReport temperature_detuning_report(const OpticalSetup& setup, const CrystalSpec& crystal,
                                              double t_lo_c, double t_hi_c, std::size_t points = 101);

nlohmann::json to_json(const SweepSpec& spec);

/// CSV: axis column then one column per family. `comment` lines are written
/// first, each prefixed by "# ".
void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::vector<std::string>& comment = {});
nlohmann::json sweep_to_json(const SweepResult& result);

}  // namespace sfg
