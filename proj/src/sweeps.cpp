#include "sfgsta/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

#include "sfgsta/errors.hpp"
#include "sfgsta/format.hpp"
#include "sfgsta/version.hpp"

namespace sfg {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kAdiabaticityGrid = 401;
}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::adiabatic: return "adiabatic";
    case Scheme::cd: return "cd";
    case Scheme::lz_optimal: return "lz_optimal";
  }
  return "?";
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::signal_wavelength ? "signal_wavelength" : "temperature";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "adiabatic") return Scheme::adiabatic;
  if (text == "cd") return Scheme::cd;
  if (text == "lz_optimal") return Scheme::lz_optimal;
  throw ValidationError("unknown scheme '" + text + "' (expected adiabatic, cd or lz_optimal)");
}

SweepAxis parse_axis(const std::string& text) {
  if (text == "signal_wavelength") return SweepAxis::signal_wavelength;
  if (text == "temperature") return SweepAxis::temperature;
  throw ValidationError("unknown axis '" + text + "' (expected signal_wavelength or temperature)");
}

std::string axis_column(SweepAxis axis) {
  return axis == SweepAxis::signal_wavelength ? "lambda1_um" : "temperature_c";
}

SweepSpec SweepSpec::with_default_axis(SweepAxis axis) {
  SweepSpec s;
  s.axis = axis;
  if (axis == SweepAxis::temperature) {
    s.lo = 0.0;
    s.hi = 100.0;
    s.points = 101;
  }
  return s;
}

void SweepSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw ValidationError("sweep range needs lo < hi");
  if (points < 2) throw ValidationError("sweep needs at least 2 points");
  if (axis == SweepAxis::signal_wavelength && !(lo > 0.0)) {
    throw ValidationError("wavelength range must be positive");
  }
  std::set<std::string> seen;
  for (const auto& f : families) {
    if (f.label.empty()) throw ValidationError("family label must not be empty");
    if (f.label.find_first_of(",\"\n\r") != std::string::npos) {
      throw ValidationError("family label '" + f.label + "' contains a comma, quote or newline");
    }
    if (!seen.insert(f.label).second) throw ValidationError("duplicate family label '" + f.label + "'");
    if (f.pump_intensity_mw_cm2 && !(*f.pump_intensity_mw_cm2 >= 0.0)) {
      throw ValidationError("family '" + f.label + "': pump intensity must be non-negative");
    }
    if (f.length_mm && !(*f.length_mm > 0.0)) {
      throw ValidationError("family '" + f.label + "': length must be positive");
    }
    if (f.c1 && !std::isfinite(*f.c1)) throw ValidationError("family '" + f.label + "': c1 must be finite");
  }
  setup.validate();
  crystal.validate();
}

std::vector<double> SweepSpec::axis_values() const {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  v.back() = hi;
  return v;
}

std::size_t SweepResult::missing() const {
  std::size_t n = 0;
  for (const auto& row : efficiency) n += std::count_if(row.begin(), row.end(), [](double e) { return std::isnan(e); });
  return n;
}

namespace {

// Baseline of one family and, when frozen, the crystal designed for it.
struct FamilyPlan {
  OpticalSetup setup;
  CrystalSpec crystal;
  std::vector<double> coeffs;
  double base_delta_k0 = 0.0;
  std::optional<AdiabaticLZDesign> lz;
  std::optional<CDDesign> cd;
  std::optional<InvariantDesign> invariant;
  std::string error;
};

InvariantDesign invariant_for(const SweepSpec& spec, const FamilyPlan& plan, const OpticalSetup& setup) {
  if (spec.lz_unknown == BoundUnknown::length) {
    return InvariantDesign::solve(plan.coeffs, coupling_from_intensity(setup), std::nullopt);
  }
  return InvariantDesign::solve(plan.coeffs, std::nullopt, plan.crystal.length_mm);
}

FamilyPlan plan_family(const SweepSpec& spec, const SweepFamily& family) {
  FamilyPlan p;
  p.setup = spec.setup;
  p.crystal = spec.crystal;
  p.coeffs = spec.lz_coeffs;
  if (family.pump_intensity_mw_cm2) p.setup.pump_intensity_mw_cm2 = *family.pump_intensity_mw_cm2;
  if (family.length_mm) p.crystal.length_mm = *family.length_mm;
  if (family.c1) {
    if (p.coeffs.empty()) p.coeffs.push_back(0.0);
    p.coeffs[0] = *family.c1;
  }
  try {
    p.base_delta_k0 = primary_phase_mismatch(p.setup);
    if (!spec.design_frozen) return p;
    switch (spec.scheme) {
      case Scheme::adiabatic: p.lz = design_adiabatic(p.crystal, p.setup).design; break;
      case Scheme::cd: p.cd = CDDesign(design_adiabatic(p.crystal, p.setup).design); break;
      case Scheme::lz_optimal: p.invariant = invariant_for(spec, p, p.setup); break;
    }
  } catch (const Error& e) {
    p.error = std::string("baseline design failed: ") + e.what();
  }
  return p;
}

OpticalSetup point_setup(const SweepSpec& spec, const FamilyPlan& plan, double x) {
  OpticalSetup s = plan.setup;
  if (spec.axis == SweepAxis::signal_wavelength) {
    s.lambda1_um = x;
  } else {
    s.temperature_c = x;
  }
  return s;
}

DriveProfile point_profile(const SweepSpec& spec, const FamilyPlan& plan, const OpticalSetup& setup) {
  if (spec.design_frozen) {
    // Fabricated crystal: only the bulk mismatch moves with the perturbation.
    const double detuning = primary_phase_mismatch(setup) - plan.base_delta_k0;
    switch (spec.scheme) {
      case Scheme::adiabatic: {
        AdiabaticLZDesign d = *plan.lz;
        d.q0 = coupling_from_intensity(setup);
        return lz_profile(d).shifted(detuning);
      }
      case Scheme::cd: return plan.cd->effective_profile().shifted(detuning);
      case Scheme::lz_optimal: return plan.invariant->profile().shifted(detuning);
    }
  }
  switch (spec.scheme) {
    case Scheme::adiabatic: return design_adiabatic(plan.crystal, setup).profile;
    case Scheme::cd: return design_cd(design_adiabatic(plan.crystal, setup).design).profile;
    case Scheme::lz_optimal: return invariant_for(spec, plan, setup).profile();
  }
  throw ContractError("unknown scheme");
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec_in, const PropagationOptions& options, std::size_t workers) {
  SweepSpec spec = spec_in;
  if (spec.families.empty()) spec.families.push_back({"baseline", {}, {}, {}});
  spec.validate();

  SweepResult r;
  r.spec = spec;
  r.axis_values = spec.axis_values();
  const std::size_t nf = spec.families.size(), np = spec.points;
  for (const auto& f : spec.families) r.labels.push_back(f.label);
  r.efficiency.assign(nf, std::vector<double>(np, kNaN));
  r.max_adiabaticity.assign(nf, std::vector<double>(np, kNaN));
  r.norm_drift.assign(nf, std::vector<double>(np, kNaN));
  r.failure.assign(nf, std::vector<std::string>(np));

  std::vector<FamilyPlan> plans;
  plans.reserve(nf);
  for (const auto& f : spec.families) plans.push_back(plan_family(spec, f));

  auto evaluate = [&](std::size_t task) {
    const std::size_t fi = task / np, pi = task % np;
    const FamilyPlan& plan = plans[fi];
    if (!plan.error.empty()) {
      r.failure[fi][pi] = plan.error;
      return;
    }
    try {
      const OpticalSetup setup = point_setup(spec, plan, r.axis_values[pi]);
      setup.validate();
      const DriveProfile profile = point_profile(spec, plan, setup);
      const Trajectory t = propagate(profile, {}, options);
      r.efficiency[fi][pi] = efficiency(t);
      r.norm_drift[fi][pi] = t.norm_drift;
      r.max_adiabaticity[fi][pi] = max_adiabaticity(profile, kAdiabaticityGrid).value;
    } catch (const std::exception& e) {
      r.efficiency[fi][pi] = kNaN;
      r.failure[fi][pi] = e.what();
    }
  };

  const std::size_t tasks = nf * np;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks; i = next++) evaluate(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  r.provenance = {{"toolkit", "sfgsta"},
                  {"version", kVersion},
                  {"input", to_json(spec)},
                  {"tolerances", {{"rel_tol", options.rel_tol}, {"abs_tol", options.abs_tol}}}};
  return r;
}

double pump_for_constant_coupling(double q0_per_mm, double lambda1_um, const OpticalSetup& setup) {
  if (!(q0_per_mm >= 0.0)) throw ContractError("q0 must be non-negative");
  OpticalSetup s = setup;
  s.lambda1_um = lambda1_um;
  s.validate();
  const double l3 = s.lambda3_um();
  const double n1 = refractive_index(*s.material, lambda1_um, s.temperature_c);
  const double n3 = refractive_index(*s.material, l3, s.temperature_c);
  return intensity_for_coupling(q0_per_mm, s.chi2_pm_v, lambda1_um, l3, n1, n3);
}

TemperatureReport temperature_detuning_report(const OpticalSetup& setup, const CrystalSpec& crystal,
                                              double t_lo_c, double t_hi_c, std::size_t points) {
  if (!(t_lo_c < t_hi_c) || points < 3) throw ValidationError("temperature range needs lo < hi and 3+ points");
  setup.validate();
  crystal.validate();
  const double base = primary_phase_mismatch(setup);
  const double span = std::abs(poling_wavevector(crystal.poling_final_um) - poling_wavevector(crystal.poling_initial_um));

  TemperatureReport rep;
  for (std::size_t i = 0; i < points; ++i) {
    OpticalSetup s = setup;
    s.temperature_c = t_lo_c + (t_hi_c - t_lo_c) * static_cast<double>(i) / static_cast<double>(points - 1);
    TemperatureRow row;
    row.temperature_c = s.temperature_c;
    row.delta_k0 = primary_phase_mismatch(s);
    row.detuning = row.delta_k0 - base;
    row.detuning_over_span = span > 0.0 ? row.detuning / span : kNaN;
    rep.rows.push_back(row);
  }

  // Least-squares quadratic in v = (T − 25)/50 (scaled for conditioning).
  const double scale = 50.0;
  double a[3][4] = {};
  for (const auto& row : rep.rows) {
    const double v = (row.temperature_c - kReferenceTemperatureC) / scale;
    const double p[3] = {1.0, v, v * v};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += p[i] * p[j];
      a[i][3] += p[i] * row.delta_k0;
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int i = c + 1; i < 3; ++i) {
      if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
    }
    std::swap(a[c], a[piv]);
    for (int i = 0; i < 3; ++i) {
      if (i == c) continue;
      const double f = a[i][c] / a[c][c];
      for (int j = c; j < 4; ++j) a[i][j] -= f * a[c][j];
    }
  }
  rep.fit_c0 = a[0][3] / a[0][0];
  rep.fit_c1 = a[1][3] / a[1][1] / scale;
  rep.fit_c2 = a[2][3] / a[2][2] / (scale * scale);
  for (const auto& row : rep.rows) {
    const double u = row.temperature_c - kReferenceTemperatureC;
    const double fit = rep.fit_c0 + u * (rep.fit_c1 + u * rep.fit_c2);
    rep.fit_max_residual = std::max(rep.fit_max_residual, std::abs(fit - row.delta_k0));
  }

  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double d = rep.rows[i].delta_k0 - rep.rows[i - 1].delta_k0;
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (!rep.segments.empty() && (sign == 0 || sign == rep.segments.back().sign)) {
      rep.segments.back().to_c = rep.rows[i].temperature_c;
    } else {
      rep.segments.push_back({rep.rows[i - 1].temperature_c, rep.rows[i].temperature_c, sign});
    }
  }
  return rep;
}

nlohmann::json to_json(const SweepSpec& spec) {
  nlohmann::json fams = nlohmann::json::array();
  for (const auto& f : spec.families) {
    nlohmann::json j = {{"label", f.label}};
    if (f.pump_intensity_mw_cm2) j["pump_intensity_mw_cm2"] = *f.pump_intensity_mw_cm2;
    if (f.length_mm) j["length_mm"] = *f.length_mm;
    if (f.c1) j["c1"] = *f.c1;
    fams.push_back(j);
  }
  nlohmann::json mat = nullptr;
  if (spec.setup.material) {
    const auto& m = *spec.setup.material;
    mat = {{"name", m.name},
           {"source", m.source},
           {"sellmeier", {m.sellmeier_a, m.sellmeier_b, m.sellmeier_c, m.sellmeier_d}},
           {"thermal_a1", m.thermal_a1},
           {"thermal_a2", m.thermal_a2},
           {"band_um", {m.band_min_um, m.band_max_um}}};
  }
  return {{"scheme", to_string(spec.scheme)},
          {"axis", to_string(spec.axis)},
          {"range", {spec.lo, spec.hi}},
          {"points", spec.points},
          {"design_frozen", spec.design_frozen},
          {"setup",
           {{"lambda1_um", spec.setup.lambda1_um},
            {"lambda2_um", spec.setup.lambda2_um},
            {"temperature_c", spec.setup.temperature_c},
            {"pump_intensity_mw_cm2", spec.setup.pump_intensity_mw_cm2},
            {"chi2_pm_v", spec.setup.chi2_pm_v},
            {"material", mat}}},
          {"crystal",
           {{"length_mm", spec.crystal.length_mm},
            {"poling_initial_um", spec.crystal.poling_initial_um},
            {"poling_final_um", spec.crystal.poling_final_um},
            {"delta_k_gvm_per_mm", spec.crystal.delta_k_gvm_per_mm}}},
          {"lz_coeffs", spec.lz_coeffs},
          {"lz_solve_for", spec.lz_unknown == BoundUnknown::length ? "length" : "q0"},
          {"families", fams}};
}

void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::vector<std::string>& comment) {
  for (const auto& c : comment) out << "# " << c << '\n';
  out << axis_column(result.spec.axis);
  for (const auto& l : result.labels) out << ',' << l;
  out << '\n';
  for (std::size_t p = 0; p < result.axis_values.size(); ++p) {
    out << fmt_sci(result.axis_values[p]);
    for (std::size_t f = 0; f < result.labels.size(); ++f) out << ',' << fmt_sci(result.efficiency[f][p]);
    out << '\n';
  }
}

nlohmann::json sweep_to_json(const SweepResult& result) {
  // NaN is not valid JSON; missing points become null with a reason.
  auto row = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return a;
  };
  nlohmann::json fams = nlohmann::json::array();
  for (std::size_t f = 0; f < result.labels.size(); ++f) {
    nlohmann::json missing = nlohmann::json::array();
    for (std::size_t p = 0; p < result.axis_values.size(); ++p) {
      if (!result.failure[f][p].empty()) missing.push_back({{"index", p}, {"reason", result.failure[f][p]}});
    }
    fams.push_back({{"label", result.labels[f]},
                    {"efficiency", row(result.efficiency[f])},
                    {"max_adiabaticity", row(result.max_adiabaticity[f])},
                    {"norm_drift", row(result.norm_drift[f])},
                    {"missing", missing}});
  }
  return {{"axis", to_string(result.spec.axis)},
          {"axis_column", axis_column(result.spec.axis)},
          {"axis_values", result.axis_values},
          {"families", fams},
          {"provenance", result.provenance}};
}

}  // namespace sfg
