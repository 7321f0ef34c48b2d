#include "sfgsta/materials.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "sfgsta/errors.hpp"
#include "sfgsta/json_util.hpp"

namespace sfg {

namespace {

constexpr double kSpeedOfLight = 299792458.0;        // m/s
constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

double polynomial_in_inverse_lambda(const std::array<double, 4>& a, double lambda_um) {
  double acc = 0.0;
  double inv = 1.0;
  for (double coeff : a) {
    acc += coeff * inv;
    inv /= lambda_um;
  }
  return acc;
}

void check_band(const MaterialModel& m, double lambda_um) {
  if (!(lambda_um >= m.band_min_um && lambda_um <= m.band_max_um)) {
    std::ostringstream os;
    os << "wavelength " << lambda_um << " um outside the supported band [" << m.band_min_um << ", "
       << m.band_max_um << "] um of material '" << m.name << "'";
    throw DomainError(os.str());
  }
}

}  // namespace

MaterialModel parse_material(std::string_view json_text) {
  const nlohmann::json doc = json_util::parse_document(json_text, "material");
  json_util::Reader r(doc, "material");
  MaterialModel m;
  m.name = r.string("name");
  m.source = r.string("source");
  auto s = r.object("sellmeier");
  m.sellmeier_a = s.number("A");
  m.sellmeier_b = s.number("B");
  m.sellmeier_c = s.number("C");
  m.sellmeier_d = s.number("D");
  auto t = r.object("thermal");
  m.thermal_a1 = t.array4("a1");
  m.thermal_a2 = t.array4("a2");
  const auto band = r.number_array("band", 2);
  m.band_min_um = band[0];
  m.band_max_um = band[1];
  if (!(m.band_min_um > 0.0 && m.band_max_um > m.band_min_um)) {
    throw ValidationError("material.band: expected 0 < min < max");
  }
  return m;
}

MaterialModel load_material(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open material file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_material(ss.str());
}

double sellmeier_index(const MaterialModel& material, double lambda_um) {
  check_band(material, lambda_um);
  const double l2 = lambda_um * lambda_um;
  double n2 = material.sellmeier_a - material.sellmeier_d * l2;
  if (material.sellmeier_b != 0.0) {
    n2 += material.sellmeier_b / (1.0 - material.sellmeier_c / l2);
  }
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    std::ostringstream os;
    os << "Sellmeier radicand " << n2 << " is not positive at " << lambda_um << " um for '"
       << material.name << "'";
    throw ModelError(os.str());
  }
  return std::sqrt(n2);
}

double thermal_index_shift(const MaterialModel& material, double lambda_um, double temperature_c) {
  check_band(material, lambda_um);
  const double dt = temperature_c - kReferenceTemperatureC;
  if (dt == 0.0) return 0.0;
  return polynomial_in_inverse_lambda(material.thermal_a1, lambda_um) * dt +
         polynomial_in_inverse_lambda(material.thermal_a2, lambda_um) * dt * dt;
}

double refractive_index(const MaterialModel& material, double lambda_um, double temperature_c) {
  return sellmeier_index(material, lambda_um) +
         thermal_index_shift(material, lambda_um, temperature_c);
}

double wavenumber(double n, double lambda_um) {
  if (!(n > 0.0) || !(lambda_um > 0.0)) {
    throw DomainError("wavenumber requires n > 0 and lambda > 0");
  }
  return 2.0 * std::numbers::pi * n / lambda_um * 1e3;
}

double idler_wavelength(double lambda1_um, double lambda2_um) {
  if (!(lambda1_um > 0.0) || !(lambda2_um > 0.0)) {
    throw DomainError("wavelengths must be positive");
  }
  if (std::isinf(lambda1_um)) return lambda2_um;
  if (std::isinf(lambda2_um)) return lambda1_um;
  return lambda1_um * lambda2_um / (lambda1_um + lambda2_um);
}

double poling_wavevector(double period_um) {
  if (!(period_um > 0.0)) throw DomainError("poling period must be positive");
  return 2.0 * std::numbers::pi / period_um * 1e3;
}

void OpticalSetup::validate() const {
  if (!material) throw ValidationError("setup.material: missing material model");
  if (!(lambda1_um > 0.0)) throw ValidationError("setup.lambda1_um: must be positive");
  if (!(lambda2_um > 0.0)) throw ValidationError("setup.lambda2_um: must be positive");
  if (!(pump_intensity_mw_cm2 >= 0.0)) {
    throw ValidationError("setup.pump_intensity_mw_cm2: must be non-negative");
  }
  if (!(chi2_pm_v > 0.0)) throw ValidationError("setup.chi2_pm_v: must be positive");
  if (!std::isfinite(temperature_c)) throw ValidationError("setup.temperature_c: must be finite");
}

void CrystalSpec::validate() const {
  if (!(length_mm > 0.0)) throw ValidationError("crystal.length_mm: must be positive");
  if (!(poling_initial_um > 0.0)) throw ValidationError("crystal.poling_initial_um: must be positive");
  if (!(poling_final_um > 0.0)) throw ValidationError("crystal.poling_final_um: must be positive");
  if (!std::isfinite(delta_k_gvm_per_mm)) {
    throw ValidationError("crystal.delta_k_gvm_per_mm: must be finite");
  }
}

double primary_phase_mismatch(const OpticalSetup& setup) {
  if (!setup.material) throw ValidationError("setup.material: missing material model");
  const auto& m = *setup.material;
  const double t = setup.temperature_c;
  const double l1 = setup.lambda1_um, l2 = setup.lambda2_um, l3 = setup.lambda3_um();
  return wavenumber(refractive_index(m, l1, t), l1) + wavenumber(refractive_index(m, l2, t), l2) -
         wavenumber(refractive_index(m, l3, t), l3);
}

double coupling_for_intensity(double intensity_mw_cm2, double chi2_pm_v, double lambda1_um,
                              double lambda3_um, double n1, double n3) {
  if (intensity_mw_cm2 < 0.0) throw DomainError("pump intensity must be non-negative");
  const double chi = chi2_pm_v * 1e-12;            // m/V
  const double intensity = intensity_mw_cm2 * 1e10;  // W/m²
  const double l1 = lambda1_um * 1e-6, l3 = lambda3_um * 1e-6;
  const double q_si = std::sqrt(32.0 * chi * chi * intensity /
                                (kSpeedOfLight * kVacuumPermittivity * l1 * l3 * n1 * n3));
  return q_si * 1e-3;
}

double intensity_for_coupling(double q0_per_mm, double chi2_pm_v, double lambda1_um,
                              double lambda3_um, double n1, double n3) {
  if (q0_per_mm < 0.0) throw DomainError("coupling must be non-negative");
  const double chi = chi2_pm_v * 1e-12;
  const double q_si = q0_per_mm * 1e3;
  const double l1 = lambda1_um * 1e-6, l3 = lambda3_um * 1e-6;
  const double intensity =
      q_si * q_si * kSpeedOfLight * kVacuumPermittivity / (32.0 * chi * chi) * l1 * l3 * n1 * n3;
  return intensity * 1e-10;
}

double coupling_from_intensity(const OpticalSetup& setup) {
  if (!setup.material) throw ValidationError("setup.material: missing material model");
  if (setup.pump_intensity_mw_cm2 < 0.0) throw DomainError("pump intensity must be non-negative");
  const double l3 = setup.lambda3_um();
  const double n1 = refractive_index(*setup.material, setup.lambda1_um, setup.temperature_c);
  const double n3 = refractive_index(*setup.material, l3, setup.temperature_c);
  return coupling_for_intensity(setup.pump_intensity_mw_cm2, setup.chi2_pm_v, setup.lambda1_um, l3,
                                n1, n3);
}

}  // namespace sfg
