"""Geometry, parameter validation and unit conversions."""

import math

import pytest
from hypothesis import given, strategies as st

from obsflow.lattice import (
    AU_CURRENT_A,
    EV,
    HARTREE_EV,
    KB_HARTREE_PER_K,
    DeviceSpec,
    PhysParams,
    Region,
    SiteSpec,
    UnitError,
    build_flat_device,
    build_ratchet_device,
    convert_units,
)


@pytest.fixture(scope="module")
def params():
    return PhysParams()


@pytest.fixture(scope="module")
def flat(params):
    return build_flat_device(params)


@pytest.fixture(scope="module")
def ratchet(params):
    return build_ratchet_device(params)


# --- units -----------------------------------------------------------------

class TestConvertUnits:
    def test_identity(self):
        assert convert_units(1.234, "eV", "eV") == 1.234

    def test_ev_hartree_roundtrip(self):
        x = convert_units(convert_units(3.7, "eV", "hartree"), "hartree", "eV")
        assert x == pytest.approx(3.7, rel=1e-14)

    def test_kelvin_is_kb_scaled(self):
        assert convert_units(1.0, "kelvin", "hartree") == KB_HARTREE_PER_K

    def test_current_unit(self):
        assert convert_units(1.0, "au_current", "ampere") == AU_CURRENT_A

    def test_unknown_pair_raises(self):
        with pytest.raises(UnitError):
            convert_units(1.0, "eV", "ampere")

    @given(st.floats(-1e6, 1e6))
    def test_linear(self, x):
        assert convert_units(x, "eV", "hartree") == pytest.approx(x * EV, rel=1e-12, abs=1e-300)

    def test_hartree_ev_is_codata(self):
        assert HARTREE_EV == pytest.approx(27.2114, rel=1e-5)


# --- PhysParams ------------------------------------------------------------

class TestPhysParams:
    def test_defaults(self, params):
        assert params.eps0 == pytest.approx(1.0 * EV)
        assert params.hopping == pytest.approx(0.5 * EV)
        assert params.lam == pytest.approx(0.2 * math.sqrt(EV))
        assert params.kT_E == 0.008
        assert params.dissipator_mode == "hermitian"

    def test_hot_cold(self):
        p = PhysParams(kdT=1e-3)
        assert p.kT_hot == pytest.approx(0.009)
        assert p.kT_cold == pytest.approx(0.007)

    def test_with_returns_new(self, params):
        q = params.with_(kdT=1e-3)
        assert q.kdT == 1e-3 and params.kdT == 0.0

    @pytest.mark.parametrize("bad", [
        dict(kdT=0.008),          # cold bath at zero temperature
        dict(kdT=-1e-4),
        dict(omega_c=0.0),
        dict(gamma_D=-0.1),
        dict(omega_floor=0.0),
        dict(dissipator_mode="secular"),
    ])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            PhysParams(**bad)


# --- device graph ----------------------------------------------------------

class TestDeviceSpec:
    def test_site_and_bond_counts(self, flat):
        assert flat.n_sites == 28
        assert len(flat.bonds) == 36

    def test_regions(self, flat):
        assert len(flat.region_sites(Region.HOT_LEAD)) == 9
        assert len(flat.region_sites(Region.COLD_LEAD)) == 9
        assert len(flat.region_sites(Region.TOP_BRANCH)) == 5
        assert len(flat.region_sites(Region.BOTTOM_BRANCH)) == 5

    def test_named_sites_are_branch_ends(self, flat):
        def x(i):
            return flat.sites[i].position[0]

        top = flat.region_sites(Region.TOP_BRANCH)
        bot = flat.region_sites(Region.BOTTOM_BRANCH)
        assert flat.named["alpha"] == min(top, key=x)
        assert flat.named["beta"] == max(top, key=x)
        assert flat.named["gamma"] == min(bot, key=x)
        assert flat.named["delta"] == max(bot, key=x)

    def test_connected(self, flat, ratchet):
        assert flat.is_connected()
        assert ratchet.is_connected()

    def test_branch_is_degree_two_path(self, flat):
        top = set(flat.region_sites(Region.TOP_BRANCH))
        internal = [(i, j) for (i, j, _t) in flat.bonds if i in top and j in top]
        assert len(internal) == 4

    def test_bond_validation(self):
        site = SiteSpec(0, (0.0, 0.0), 0.0, Region.HOT_LEAD)
        other = SiteSpec(1, (1.0, 0.0), 0.0, Region.HOT_LEAD)
        with pytest.raises(ValueError, match="self-bond"):
            DeviceSpec((site, other), ((0, 0, 1.0),))
        with pytest.raises(ValueError, match="ordered"):
            DeviceSpec((site, other), ((1, 0, 1.0),))
        with pytest.raises(ValueError, match="duplicate"):
            DeviceSpec((site, other), ((0, 1, 1.0), (0, 1, 1.0)))
        with pytest.raises(ValueError, match="invalid endpoint"):
            DeviceSpec((site, other), ((0, 2, 1.0),))

    def test_ids_must_be_contiguous(self):
        s0 = SiteSpec(0, (0.0, 0.0), 0.0, Region.HOT_LEAD)
        s2 = SiteSpec(2, (1.0, 0.0), 0.0, Region.HOT_LEAD)
        with pytest.raises(ValueError, match="contiguous"):
            DeviceSpec((s0, s2), ())


class TestBuilders:
    def test_flat_onsite_uniform(self, flat, params):
        assert all(s.onsite == pytest.approx(params.eps0) for s in flat.sites)

    def test_ratchet_ladders_antiparallel(self, ratchet):
        def x(i):
            return ratchet.sites[i].position[0]

        top = sorted(ratchet.region_sites(Region.TOP_BRANCH), key=x)
        bot = sorted(ratchet.region_sites(Region.BOTTOM_BRANCH), key=x)
        top_e = [ratchet.sites[i].onsite for i in top]
        bot_e = [ratchet.sites[i].onsite for i in bot]
        expected = [(1.1 + 0.1 * k) * EV for k in range(5)]
        assert top_e == pytest.approx(expected)
        assert bot_e == pytest.approx(expected[::-1])

    def test_ratchet_leads_at_eps0(self, ratchet, params):
        for region in (Region.HOT_LEAD, Region.COLD_LEAD):
            for i in ratchet.region_sites(region):
                assert ratchet.sites[i].onsite == pytest.approx(params.eps0)

    def test_lattice_spacing_scales_positions(self, params, flat):
        wide = build_flat_device(params, lattice_spacing=2.5)
        for a, b in zip(flat.sites, wide.sites):
            assert b.position[0] == pytest.approx(2.5 * a.position[0])
            assert b.position[1] == pytest.approx(2.5 * a.position[1])

    def test_same_graph_for_both_devices(self, flat, ratchet):
        assert flat.bonds == ratchet.bonds
        assert flat.named == ratchet.named
