import math
import os
from pathlib import Path

import pytest

import sfgsta

SOURCE = Path(os.environ.get("SFGSTA_SOURCE_DIR", Path(__file__).resolve().parents[2]))
KTP = str(SOURCE / "data" / "ktp_z.json")


@pytest.fixture(scope="module")
def material():
    return sfgsta.load_material(KTP)


def test_version():
    assert sfgsta.__version__ == "0.1.0"


def test_material_and_coupling(material):
    setup = sfgsta.OpticalSetup(material, pump_intensity_mw_cm2=360.0)
    assert sfgsta.refractive_index(material, 1.064) == pytest.approx(1.83018, rel=1e-5)
    assert sfgsta.primary_phase_mismatch(setup) == pytest.approx(-422.676, rel=3e-6)
    q0 = sfgsta.coupling_from_intensity(setup)
    assert q0 == pytest.approx(3.6879, rel=1e-4)
    assert sfgsta.pump_for_constant_coupling(q0, 1.535, setup) == pytest.approx(360.0, rel=1e-12)


def test_adiabatic_and_cd(material):
    setup = sfgsta.OpticalSetup(material, pump_intensity_mw_cm2=60.0)
    profile, design = sfgsta.design_adiabatic(sfgsta.CrystalSpec(2.0), setup)
    assert design.avoided_crossing()
    cd = sfgsta.CDDesign(design)
    a = sfgsta.propagate(cd.effective_profile())
    b = sfgsta.propagate(cd.two_field_profile())
    assert abs(a["efficiency"] - b["efficiency"]) < 1e-7
    assert len(a["z"]) == 501


def test_invariant_design():
    d = sfgsta.solve_zeta([-1.47], length=2.0)
    assert d.q0 * d.length == pytest.approx(sfgsta.bound_value([-1.47]), rel=1e-14)
    assert d.zeta(2.0) == pytest.approx(math.pi)
    zr, br = d.residuals()
    assert max(zr, br) < 1e-8
    assert sfgsta.propagate(d.profile())["efficiency"] > 0.999999
    opt = sfgsta.optimize_c1(2.0, "q0")
    assert opt["c1"] == pytest.approx(-1.4657, abs=1e-3)


def test_errors_map_to_exceptions(material):
    with pytest.raises(sfgsta.ContractError):
        sfgsta.solve_zeta([], q0=1.0, length=1.0)
    with pytest.raises(sfgsta.DomainError):
        sfgsta.refractive_index(material, 9.0)
    with pytest.raises(sfgsta.Error):
        sfgsta.load_material("/nonexistent.json")
