#pragma once

// Scenario files and the material / design / propagate / sweep commands.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sfgsta/dynamics.hpp"
#include "sfgsta/materials.hpp"
#include "sfgsta/profiles.hpp"
#include "sfgsta/sweeps.hpp"

namespace sfg::cli {

struct NamedSweep {
  std::string name;
  SweepSpec spec;
};

struct Scenario {
  std::filesystem::path path;
  std::string digest;  // "fnv1a64:<hex>" of the scenario bytes
  std::filesystem::path material_file;
  OpticalSetup setup;
  CrystalSpec crystal;

  Scheme scheme = Scheme::adiabatic;
  bool auto_center = true;
  std::string cd_form = "effective";  // or "two_field"
  std::vector<double> lz_coeffs;
  std::string lz_solve_for = "q0";  // q0 | length | none
  std::optional<double> lz_q0_per_mm;

  PropagationOptions solver;
  std::filesystem::path output_dir = "out";
  bool write_csv = true;
  bool write_json = true;
  double damage_threshold_mw_cm2 = 500.0;
  std::vector<NamedSweep> sweeps;
};

std::string fnv1a64(std::string_view bytes);

/// Relative paths inside the document resolve against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Drive and scheme diagnostics for a scenario.
struct BuiltDesign {
  DriveProfile profile;
  nlohmann::json metadata;
  std::optional<AdiabaticLZDesign> lz;
  std::optional<CDDesign> cd;
  std::optional<InvariantDesign> invariant;
};
BuiltDesign build_design(const Scenario& scenario);

struct CommonOptions {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> out;
  std::size_t workers = 1;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
};

struct MaterialQuery {
  std::optional<std::filesystem::path> material_file;
  std::optional<std::filesystem::path> scenario;
  std::optional<double> lambda1_um;
  std::optional<double> lambda2_um;
  std::optional<double> temperature_c;
};

/// 0 success, 2 validation/contract, 3 domain/design/model/singularity, 4 integration.
int exit_code_for(const std::exception& e);

int cmd_material(const MaterialQuery& query, std::ostream& out, std::ostream& err);
int cmd_design(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_propagate(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommonOptions& options, std::ostream& out, std::ostream& err);

/// Writes `content` to a temporary file beside `path` and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sfg::cli
