#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sfgsta/cli.hpp"
#include "sfgsta/errors.hpp"
#include "sfgsta/json_util.hpp"

namespace sfg::cli {

namespace fs = std::filesystem;
using json_util::Reader;

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
  return buf;
}

namespace {

void read_setup(const Reader& r, OpticalSetup& s) {
  r.only({"lambda1_um", "lambda2_um", "temperature_c", "pump_intensity_mw_cm2", "chi2_pm_v"});
  s.lambda1_um = r.number_or("lambda1_um", s.lambda1_um);
  s.lambda2_um = r.number_or("lambda2_um", s.lambda2_um);
  s.temperature_c = r.number_or("temperature_c", s.temperature_c);
  s.pump_intensity_mw_cm2 = r.number_or("pump_intensity_mw_cm2", 0.0);
  s.chi2_pm_v = r.number_or("chi2_pm_v", s.chi2_pm_v);
}

void read_crystal(const Reader& r, CrystalSpec& c) {
  r.only({"length_mm", "poling_initial_um", "poling_final_um", "delta_k_gvm_per_mm"});
  c.length_mm = r.number_or("length_mm", c.length_mm);
  c.poling_initial_um = r.number_or("poling_initial_um", c.poling_initial_um);
  c.poling_final_um = r.number_or("poling_final_um", c.poling_final_um);
  c.delta_k_gvm_per_mm = r.number_or("delta_k_gvm_per_mm", c.delta_k_gvm_per_mm);
}

std::string read_solve_for(const Reader& r, const std::string& key, const std::string& fallback) {
  const std::string v = r.optional_string(key).value_or(fallback);
  if (v != "q0" && v != "length" && v != "none") Reader::fail(r.field(key), "expected q0, length or none");
  return v;
}

void read_scheme(const Reader& r, Scenario& sc) {
  if (r.node().size() != 1) Reader::fail(r.path(), "expected exactly one of adiabatic, cd, lz_optimal");
  const std::string key = r.node().begin().key();
  if (key != "adiabatic" && key != "cd" && key != "lz_optimal") {
    Reader::fail(r.field(key), "unknown scheme (expected adiabatic, cd or lz_optimal)");
  }
  sc.scheme = parse_scheme(key);
  const Reader b = r.object(key);
  switch (sc.scheme) {
    case Scheme::adiabatic:
      b.only({"auto_center"});
      sc.auto_center = b.boolean_or("auto_center", true);
      break;
    case Scheme::cd:
      b.only({"auto_center", "form"});
      sc.auto_center = b.boolean_or("auto_center", true);
      sc.cd_form = b.optional_string("form").value_or("effective");
      if (sc.cd_form != "effective" && sc.cd_form != "two_field") {
        Reader::fail(b.field("form"), "expected effective or two_field");
      }
      break;
    case Scheme::lz_optimal:
      b.only({"coeffs", "solve_for", "q0_per_mm"});
      sc.lz_coeffs = b.number_array("coeffs");
      sc.lz_solve_for = read_solve_for(b, "solve_for", "q0");
      sc.lz_q0_per_mm = b.optional_number("q0_per_mm");
      if (sc.lz_q0_per_mm && !(*sc.lz_q0_per_mm > 0.0)) Reader::fail(b.field("q0_per_mm"), "must be positive");
      if (sc.lz_q0_per_mm && sc.lz_solve_for == "q0") {
        Reader::fail(b.field("q0_per_mm"), "cannot be given when solve_for is q0");
      }
      break;
  }
}

NamedSweep read_sweep(const Reader& r, const Scenario& sc, const std::string& where) {
  r.only({"name", "scheme", "axis", "range_um", "range_c", "points", "design_frozen", "families", "lz_coeffs",
          "lz_solve_for"});
  NamedSweep ns;
  ns.name = r.string("name");
  if (ns.name.empty()) Reader::fail(r.field("name"), "must not be empty");
  for (char c : ns.name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      Reader::fail(r.field("name"), "only letters, digits, '_' and '-' are allowed");
    }
  }
  Scheme scheme = sc.scheme;
  SweepAxis axis = SweepAxis::signal_wavelength;
  const std::string scheme_text = r.optional_string("scheme").value_or(to_string(sc.scheme));
  const std::string axis_text = r.string("axis");
  try {
    scheme = parse_scheme(scheme_text);
    axis = parse_axis(axis_text);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  SweepSpec& s = ns.spec;
  s = SweepSpec::with_default_axis(axis);
  s.scheme = scheme;
  const std::string range_key = s.axis == SweepAxis::signal_wavelength ? "range_um" : "range_c";
  const std::string other_key = s.axis == SweepAxis::signal_wavelength ? "range_c" : "range_um";
  if (r.has(other_key)) Reader::fail(r.field(other_key), "unit does not match the axis; use " + range_key);
  if (r.has(range_key)) {
    const auto v = r.number_array(range_key, 2);
    s.lo = v[0];
    s.hi = v[1];
    if (!(s.lo < s.hi)) Reader::fail(r.field(range_key), "expected [lo, hi] with lo < hi");
  }
  s.points = r.count_or("points", s.points);
  if (s.points < 2) Reader::fail(r.field("points"), "need at least 2 points");
  s.design_frozen = r.boolean_or("design_frozen", true);
  s.setup = sc.setup;
  s.crystal = sc.crystal;
  s.lz_coeffs = r.has("lz_coeffs") ? r.number_array("lz_coeffs") : (sc.lz_coeffs.empty() ? std::vector<double>{-1.47} : sc.lz_coeffs);
  const std::string solve_for = read_solve_for(r, "lz_solve_for", sc.scheme == Scheme::lz_optimal ? sc.lz_solve_for : "q0");
  if (solve_for == "none") Reader::fail(r.field("lz_solve_for"), "sweeps need q0 or length");
  s.lz_unknown = solve_for == "length" ? BoundUnknown::length : BoundUnknown::q0;

  const auto& fams = r.require("families");
  if (!fams.is_array() || fams.empty()) Reader::fail(r.field("families"), "expected a non-empty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const Reader f(fams[i], r.field("families") + "[" + std::to_string(i) + "]");
    f.only({"label", "pump_intensity_mw_cm2", "length_mm", "c1"});
    SweepFamily fam;
    fam.label = f.string("label");
    if (fam.label.empty() || fam.label.find_first_of(",\"\n\r") != std::string::npos) {
      Reader::fail(f.field("label"), "must be non-empty without commas, quotes or newlines");
    }
    if (!labels.insert(fam.label).second) Reader::fail(f.field("label"), "duplicate label '" + fam.label + "'");
    fam.pump_intensity_mw_cm2 = f.optional_number("pump_intensity_mw_cm2");
    fam.length_mm = f.optional_number("length_mm");
    fam.c1 = f.optional_number("c1");
    if (fam.pump_intensity_mw_cm2 && !(*fam.pump_intensity_mw_cm2 >= 0.0)) {
      Reader::fail(f.field("pump_intensity_mw_cm2"), "must be non-negative");
    }
    if (fam.length_mm && !(*fam.length_mm > 0.0)) Reader::fail(f.field("length_mm"), "must be positive");
    s.families.push_back(fam);
  }
  return ns;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const fs::path& base_dir) {
  const nlohmann::json doc = json_util::parse_document(text, "scenario");
  const Reader r(doc, "scenario");
  r.only({"description", "material_file", "setup", "crystal", "scheme", "solver", "output", "limits", "sweeps"});

  Scenario sc;
  sc.digest = fnv1a64(text);
  if (r.has("description")) (void)r.string("description");

  sc.material_file = r.string("material_file");
  if (sc.material_file.is_relative()) sc.material_file = base_dir / sc.material_file;
  if (!fs::is_regular_file(sc.material_file)) {
    Reader::fail(r.field("material_file"), "file not found: " + sc.material_file.string());
  }
  try {
    sc.setup.material = std::make_shared<const MaterialModel>(load_material(sc.material_file));
  } catch (const ValidationError& e) {
    Reader::fail(r.field("material_file"), e.what());
  }

  read_setup(r.object("setup"), sc.setup);
  read_crystal(r.object("crystal"), sc.crystal);
  read_scheme(r.object("scheme"), sc);

  if (r.has("solver")) {
    const Reader s = r.object("solver");
    s.only({"rel_tol", "abs_tol", "samples"});
    sc.solver.rel_tol = s.number_or("rel_tol", sc.solver.rel_tol);
    sc.solver.abs_tol = s.number_or("abs_tol", sc.solver.abs_tol);
    sc.solver.samples = s.count_or("samples", sc.solver.samples);
    if (!(sc.solver.rel_tol > 0.0)) Reader::fail(s.field("rel_tol"), "must be positive");
    if (!(sc.solver.abs_tol > 0.0)) Reader::fail(s.field("abs_tol"), "must be positive");
  }
  if (r.has("output")) {
    const Reader o = r.object("output");
    o.only({"directory", "formats"});
    if (o.has("directory")) {
      sc.output_dir = o.string("directory");
      if (sc.output_dir.is_relative()) sc.output_dir = base_dir / sc.output_dir;
    }
    if (o.has("formats")) {
      const auto& f = o.require("formats");
      if (!f.is_array() || f.empty()) Reader::fail(o.field("formats"), "expected a non-empty array");
      sc.write_csv = sc.write_json = false;
      for (const auto& x : f) {
        const std::string v = x.is_string() ? x.get<std::string>() : "";
        if (v == "csv") {
          sc.write_csv = true;
        } else if (v == "json") {
          sc.write_json = true;
        } else {
          Reader::fail(o.field("formats"), "expected \"csv\" and/or \"json\"");
        }
      }
    }
  } else {
    sc.output_dir = base_dir / "out";
  }
  if (r.has("limits")) {
    const Reader l = r.object("limits");
    l.only({"damage_threshold_mw_cm2"});
    sc.damage_threshold_mw_cm2 = l.number_or("damage_threshold_mw_cm2", sc.damage_threshold_mw_cm2);
    if (!(sc.damage_threshold_mw_cm2 > 0.0)) Reader::fail(l.field("damage_threshold_mw_cm2"), "must be positive");
  }

  sc.setup.validate();
  sc.crystal.validate();
  if (sc.scheme != Scheme::lz_optimal && !(sc.setup.pump_intensity_mw_cm2 > 0.0)) {
    Reader::fail("scenario.setup.pump_intensity_mw_cm2", "required (> 0) for the adiabatic and cd schemes");
  }

  if (r.has("sweeps")) {
    const auto& arr = r.require("sweeps");
    if (!arr.is_array()) Reader::fail(r.field("sweeps"), "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = r.field("sweeps") + "[" + std::to_string(i) + "]";
      NamedSweep ns = read_sweep(Reader(arr[i], where), sc, where);
      if (!names.insert(ns.name).second) Reader::fail(where + ".name", "duplicate sweep name '" + ns.name + "'");
      sc.sweeps.push_back(std::move(ns));
    }
  }
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str(), path.parent_path());
  sc.path = path;
  return sc;
}

}  // namespace sfg::cli
