import json

import numpy as np
import pytest

from conifold_lab.errors import PreconditionError
from conifold_lab.suites import (RUNNERS, SUITES, CheckRecord, cone_chart_bilipschitz, fs_pullback_max,
                                 measure_sigma, report_constants, resolution_bilipschitz, rng_for,
                                 settings_for)


def test_rng_streams_depend_on_name_and_seed():
    a = rng_for(0, "sigma").normal(size=4)
    assert np.array_equal(a, rng_for(0, "sigma").normal(size=4))
    assert not np.array_equal(a, rng_for(0, "stokes").normal(size=4))
    assert not np.array_equal(a, rng_for(1, "sigma").normal(size=4))


def test_record_serialises_nonfinite_values():
    rec = CheckRecord("x", "anchor", float("inf"), "finite", False, details={"v": np.float64(np.nan)})
    d = rec.as_dict()
    assert d["value"] == "inf" and d["details"]["v"] == "nan"
    json.dumps(d, allow_nan=False)


def test_every_suite_registered():
    assert set(SUITES) == set(RUNNERS)


@pytest.mark.parametrize("name", ["lagrangian", "tame", "totally-real", "two-point"])
@pytest.mark.parametrize("knot", ["unknot", "torus:2,3"])
def test_knot_suites_pass(name, knot):
    s = settings_for(knot, grid=(12, 12, 4), sigma_samples=1000, vector_samples=4)
    records = RUNNERS[name](s)
    assert records and all(r.passed for r in records), [r.as_dict() for r in records if not r.passed]


@pytest.mark.parametrize("name", ["bilipschitz", "curvature", "stokes"])
def test_knot_independent_suites_pass(name):
    records = RUNNERS[name](settings_for("unknot", discs=4))
    assert all(r.passed for r in records), [r.as_dict() for r in records if not r.passed]


def test_tame_refuses_large_eps():
    s = settings_for("torus:2,3", eps=0.9, sigma_samples=2000)
    with pytest.raises(PreconditionError, match="refused"):
        RUNNERS["tame"](s)


def test_sigma_is_sampled_field_norm():
    knot = settings_for("torus:2,3").knot
    sigma, field_, pts = measure_sigma(knot, 0.1, (0.25, 2.0), 2000, rng_for(0, "s"))
    assert sigma == field_.norm(pts).max()
    assert np.isfinite(sigma) and sigma > 0
    again, _, _ = measure_sigma(knot, 0.1, (0.25, 2.0), 2000, rng_for(0, "s"))
    assert again == sigma


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_resolution_bound_is_sharp(R):
    # the Fubini-Study term adds at most 2/R^2, attained when the fibre
    # direction is orthogonal to w
    res = resolution_bilipschitz(R, 2000, rng_for(0, f"r{R}"))
    assert res.min_eig == pytest.approx(1.0, abs=1e-6)
    assert res.max_eig <= 1 + 2 / R ** 2 + 1e-6
    assert res.max_eig == pytest.approx(1 + 2 / R ** 2, rel=1e-2)
    assert fs_pullback_max(R, 2000, rng_for(0, f"f{R}")) == pytest.approx(2 / R ** 2, rel=1e-2)


def test_cone_chart_eigenvalues_bounded():
    res = cone_chart_bilipschitz(2000, rng_for(0, "cone"))
    assert 1 / 20 < res.min_eig <= res.max_eig < 20


def test_report_constants_keys():
    c = report_constants(settings_for("unknot", eps=0.25, grid=(12, 12, 4), sigma_samples=1000))
    assert c["resolution_radius"] == 0.5
    assert c["bilipschitz_bound"] == pytest.approx(9.0)
    assert c["taming_constant"] <= c["taming_bound"]
    assert c["min_totally_real_angle"] > 0
