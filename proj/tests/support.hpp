#pragma once

#include <filesystem>
#include <memory>

#include "sfgsta/materials.hpp"

namespace sfg::test {

inline std::filesystem::path source_dir() { return SFGSTA_SOURCE_DIR; }

inline std::shared_ptr<const MaterialModel> ktp() {
  static const auto m = std::make_shared<const MaterialModel>(load_material(source_dir() / "data" / "ktp_z.json"));
  return m;
}

inline OpticalSetup ktp_setup(double pump_mw_cm2) {
  OpticalSetup s;
  s.material = ktp();
  s.pump_intensity_mw_cm2 = pump_mw_cm2;
  return s;
}

inline CrystalSpec crystal(double length_mm) {
  CrystalSpec c;
  c.length_mm = length_mm;
  return c;
}

}  // namespace sfg::test
