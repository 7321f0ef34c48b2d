#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sfgsta/cli.hpp"
#include "sfgsta/errors.hpp"
#include "sfgsta/format.hpp"
#include "sfgsta/version.hpp"

namespace sfg::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ContractError*>(&e)) return 2;
  if (dynamic_cast<const IntegrationError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
      out << content;
      out.flush();
      if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string provenance_line(const Scenario& sc) {
  return std::string("sfgsta ") + kVersion + " scenario-digest=" + sc.digest;
}

nlohmann::json provenance(const Scenario& sc) {
  return {{"toolkit", "sfgsta"},
          {"version", kVersion},
          {"scenario_digest", sc.digest},
          {"scenario_file", sc.path.filename().string()}};
}

double intensity_for(const OpticalSetup& s, double q) {
  const double l3 = s.lambda3_um();
  return intensity_for_coupling(q, s.chi2_pm_v, s.lambda1_um, l3, refractive_index(*s.material, s.lambda1_um, s.temperature_c),
                                refractive_index(*s.material, l3, s.temperature_c));
}

Scenario load_with_overrides(const CommonOptions& o) {
  Scenario sc = load_scenario(o.scenario);
  if (o.out) sc.output_dir = *o.out;
  if (o.rel_tol) {
    if (!(*o.rel_tol > 0.0)) throw ValidationError("--rel-tol: must be positive");
    sc.solver.rel_tol = *o.rel_tol;
  }
  if (o.abs_tol) {
    if (!(*o.abs_tol > 0.0)) throw ValidationError("--abs-tol: must be positive");
    sc.solver.abs_tol = *o.abs_tol;
  }
  return sc;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << " (at z = " << e.z_mm() << " mm)\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

void add_intensity_check(nlohmann::json& meta, const Scenario& sc, double q_peak) {
  const double peak = intensity_for(sc.setup, q_peak);
  const bool over = peak > sc.damage_threshold_mw_cm2;
  meta["peak_pump_intensity_mw_cm2"] = num(peak);
  meta["damage_threshold_mw_cm2"] = sc.damage_threshold_mw_cm2;
  meta["exceeds_damage_threshold"] = over;
  if (over) {
    std::ostringstream w;
    w << "peak pump intensity " << peak << " MW/cm2 exceeds the damage threshold " << sc.damage_threshold_mw_cm2
      << " MW/cm2";
    meta["warnings"].push_back(w.str());
  }
}

InvariantDesign solve_invariant(const Scenario& sc) {
  if (sc.lz_solve_for == "q0") return InvariantDesign::solve(sc.lz_coeffs, std::nullopt, sc.crystal.length_mm);
  const double q0 = sc.lz_q0_per_mm.value_or(coupling_from_intensity(sc.setup));
  if (!(q0 > 0.0)) throw ValidationError("scenario.setup.pump_intensity_mw_cm2: needed to fix Q0 (> 0)");
  if (sc.lz_solve_for == "length") return InvariantDesign::solve(sc.lz_coeffs, q0, std::nullopt);
  return design_lz_optimal(sc.lz_coeffs, q0, sc.crystal.length_mm).design;
}

}  // namespace

BuiltDesign build_design(const Scenario& sc) {
  nlohmann::json meta = {{"scheme", to_string(sc.scheme)}, {"warnings", nlohmann::json::array()}};
  std::optional<AdiabaticLZDesign> lz;
  std::optional<CDDesign> cd;
  std::optional<InvariantDesign> inv;
  std::optional<DriveProfile> profile;

  if (sc.scheme == Scheme::adiabatic || sc.scheme == Scheme::cd) {
    const AdiabaticResult a = design_adiabatic(sc.crystal, sc.setup, {sc.auto_center});
    lz = a.design;
    for (const auto& w : a.design.warnings) meta["warnings"].push_back(w);
    meta["length_mm"] = a.design.length;
    meta["delta0_per_mm"] = a.design.delta0;
    meta["alpha_per_mm2"] = a.design.alpha;
    meta["q0_per_mm"] = a.design.q0;
    meta["delta_k0_per_mm"] = a.design.delta_k0;
    meta["grating_reference_per_mm"] = a.design.grating_reference;
    meta["avoided_crossing"] = a.design.avoided_crossing();
    meta["poling_period_um"] = {num(a.design.poling_period_um(0.0)), num(a.design.poling_period_um(a.design.length))};
    if (a.design.q0 > 0.0 || a.design.delta0 != 0.0) {
      const auto peak = max_adiabaticity(a.profile);
      meta["max_adiabaticity"] = {{"value", num(peak.value)}, {"z_mm", peak.z}};
      if (peak.value > 1.0) meta["warnings"].push_back("adiabatic condition is violated (max C_ad > 1)");
    }
    if (sc.scheme == Scheme::adiabatic) {
      profile = a.profile;
    } else {
      cd.emplace(a.design);
      profile = sc.cd_form == "two_field" ? cd->two_field_profile() : cd->effective_profile();
      meta["cd_form"] = sc.cd_form;
      const double qmax = cd->max_q_eff();
      meta["q_eff_per_mm"] = {{"min", std::min(cd->q_eff(0.0), cd->q_eff(a.design.length))}, {"max", qmax}};
      meta["theta_dot_max_per_mm"] = 2.0 * std::sqrt(std::max(0.0, qmax * qmax - a.design.q0 * a.design.q0));
      add_intensity_check(meta, sc, qmax);
    }
  } else {
    inv = solve_invariant(sc);
    profile = inv->profile();
    const auto res = inv->residuals();
    meta["coeffs"] = inv->coeffs();
    meta["solve_for"] = sc.lz_solve_for;
    meta["q0_per_mm"] = inv->q0();
    meta["length_mm"] = inv->length();
    meta["bound_value"] = inv->bound_value();
    meta["bound_minimum"] = InvariantDesign::bound_minimum();
    meta["residuals"] = {{"zeta_rate", res.zeta_rate}, {"beta_rate", res.beta_rate}};
    meta["abs_error_integral_mm"] = std::abs(error_integral(*inv));
    meta["delta_k_opt_per_mm"] = {inv->delta_k_opt(0.0), inv->delta_k_opt(inv->length())};
    const double implied = intensity_for(sc.setup, inv->q0());
    meta["implied_pump_intensity_mw_cm2"] = implied;
    if (sc.lz_solve_for == "q0" && sc.setup.pump_intensity_mw_cm2 > 0.0 &&
        std::abs(sc.setup.pump_intensity_mw_cm2 - implied) > 1e-6 * implied) {
      std::ostringstream w;
      w << "setup pump intensity " << sc.setup.pump_intensity_mw_cm2 << " MW/cm2 is not used; the bound relation at L = "
        << inv->length() << " mm requires " << implied << " MW/cm2";
      meta["warnings"].push_back(w.str());
    }
    if (sc.lz_solve_for == "length" && std::abs(inv->length() - sc.crystal.length_mm) > 1e-9 * inv->length()) {
      std::ostringstream w;
      w << "crystal.length_mm is replaced by the bound-relation length " << inv->length() << " mm";
      meta["warnings"].push_back(w.str());
    }
    add_intensity_check(meta, sc, inv->q0());
  }
  return {*profile, meta, lz, cd, inv};
}

int cmd_material(const MaterialQuery& q, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    OpticalSetup s;
    if (q.scenario) s = load_scenario(*q.scenario).setup;
    if (q.material_file) s.material = std::make_shared<const MaterialModel>(load_material(*q.material_file));
    if (!s.material) throw ValidationError("material: give --material or --scenario");
    if (q.lambda1_um) s.lambda1_um = *q.lambda1_um;
    if (q.lambda2_um) s.lambda2_um = *q.lambda2_um;
    if (q.temperature_c) s.temperature_c = *q.temperature_c;
    s.validate();
    const auto& m = *s.material;
    const double dk0 = primary_phase_mismatch(s);
    std::ostringstream o;
    o << "# sfgsta " << kVersion << " material=" << m.name << " temperature_c=" << fmt_sci(s.temperature_c) << '\n';
    o << "role,lambda_um,n,n_ref,delta_n,k_per_mm\n";
    const std::pair<const char*, double> rows[] = {{"signal", s.lambda1_um}, {"pump", s.lambda2_um}, {"idler", s.lambda3_um()}};
    for (const auto& [role, l] : rows) {
      const double n = refractive_index(m, l, s.temperature_c);
      const double n_ref = sellmeier_index(m, l);
      o << role << ',' << fmt_sci(l) << ',' << fmt_sci(n) << ',' << fmt_sci(n_ref) << ','
        << fmt_sci(thermal_index_shift(m, l, s.temperature_c)) << ',' << fmt_sci(wavenumber(n, l)) << '\n';
    }
    o << "delta_k0_per_mm," << fmt_sci(dk0) << '\n';
    out << o.str();
    return 0;
  });
}

int cmd_design(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_with_overrides(options);
    BuiltDesign b = build_design(sc);
    const DriveProfile& p = b.profile;
    const std::size_t n = std::max<std::size_t>(sc.solver.samples, 501);

    std::ostringstream csv;
    csv << "# " << provenance_line(sc) << '\n';
    csv << "z_mm,delta_k_per_mm,coupling_per_mm,coupling_y_per_mm,adiabaticity\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double z = i + 1 == n ? p.length() : p.length() * static_cast<double>(i) / static_cast<double>(n - 1);
      double cad = kNaN;
      try {
        cad = adiabaticity_measure(p, z);
      } catch (const SingularityError&) {
      }
      csv << fmt_sci(z) << ',' << fmt_sci(p.delta_k(z)) << ',' << fmt_sci(p.coupling(z)) << ','
          << fmt_sci(p.coupling_y(z)) << ',' << fmt_sci(cad) << '\n';
    }
    b.metadata["provenance"] = provenance(sc);
    b.metadata["samples"] = n;
    if (sc.write_csv) write_atomic(sc.output_dir / "profile.csv", csv.str());
    if (sc.write_json) write_atomic(sc.output_dir / "design.json", b.metadata.dump(2) + "\n");
    out << "design: " << to_string(sc.scheme) << " L = " << p.length() << " mm -> " << sc.output_dir.string() << '\n';
    for (const auto& w : b.metadata["warnings"]) out << "warning: " << w.get<std::string>() << '\n';
    return 0;
  });
}

int cmd_propagate(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_with_overrides(options);
    BuiltDesign b = build_design(sc);
    const Trajectory t = propagate(b.profile, {}, sc.solver);
    const double eff = efficiency(t);
    auto bloch = [](const ModeState& s) {
      const BlochVector v = bloch_vector(s);
      return nlohmann::json{v.x, v.y, v.z};
    };
    nlohmann::json summary = {{"scheme", to_string(sc.scheme)},
                              {"length_mm", b.profile.length()},
                              {"efficiency", eff},
                              {"norm_drift", t.norm_drift},
                              {"bloch_initial", bloch(t.initial())},
                              {"bloch_final", bloch(t.final_state())},
                              {"steps_accepted", t.steps_accepted},
                              {"steps_rejected", t.steps_rejected},
                              {"rel_tol", sc.solver.rel_tol},
                              {"abs_tol", sc.solver.abs_tol},
                              {"warnings", b.metadata["warnings"]}};
    if (b.cd) {
      // Eigenstates are those of the uncorrected sweep, followed by the two-field drive.
      const Trajectory two = sc.cd_form == "two_field" ? t : propagate(b.cd->two_field_profile(), {}, sc.solver);
      const auto fid = eigenstate_fidelity(b.cd->reference_profile(), two);
      summary["min_eigenstate_fidelity"] = *std::min_element(fid.begin(), fid.end());
      const Trajectory eff_t = sc.cd_form == "two_field" ? propagate(b.cd->effective_profile(), {}, sc.solver) : t;
      double diff = 0.0;
      for (std::size_t i = 0; i < two.states.size(); ++i) {
        diff = std::max(diff, std::abs(two.states[i].idler_population() - eff_t.states[i].idler_population()));
      }
      summary["two_field_vs_effective_max_population_difference"] = diff;
    } else if (b.invariant) {
      double worst = 1.0;
      for (std::size_t i = 0; i < t.z.size(); ++i) {
        const ModeState lr = b.invariant->lr_solution(t.z[i]);
        worst = std::min(worst, std::norm(std::conj(lr.a1) * t.states[i].a1 + std::conj(lr.a3) * t.states[i].a3));
      }
      summary["min_lr_solution_fidelity"] = worst;
    } else {
      const auto fid = eigenstate_fidelity(b.profile, t);
      summary["final_eigenstate_fidelity"] = fid.back();
    }
    summary["provenance"] = provenance(sc);

    std::ostringstream csv;
    csv << "# " << provenance_line(sc) << '\n';
    write_trajectory_csv(csv, t);
    if (sc.write_csv) write_atomic(sc.output_dir / "trajectory.csv", csv.str());
    if (sc.write_json) write_atomic(sc.output_dir / "summary.json", summary.dump(2) + "\n");
    out << "efficiency " << fmt_sci(eff) << " norm_drift " << fmt_sci(t.norm_drift) << '\n';
    return 0;
  });
}

int cmd_sweep(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_with_overrides(options);
    if (sc.sweeps.empty()) throw ValidationError("scenario.sweeps: no sweep defined");
    for (const auto& ns : sc.sweeps) {
      SweepResult r = run_sweep(ns.spec, sc.solver, options.workers);
      r.provenance["scenario_digest"] = sc.digest;
      r.provenance["sweep"] = ns.name;
      std::ostringstream csv;
      write_sweep_csv(csv, r, {provenance_line(sc) + " sweep=" + ns.name});
      if (sc.write_csv) write_atomic(sc.output_dir / (ns.name + ".csv"), csv.str());
      if (sc.write_json) write_atomic(sc.output_dir / (ns.name + ".json"), sweep_to_json(r).dump(2) + "\n");
      out << "sweep " << ns.name << ": " << r.labels.size() << " x " << r.axis_values.size() << " points, "
          << r.missing() << " missing\n";
    }
    return 0;
  });
}

}  // namespace sfg::cli
