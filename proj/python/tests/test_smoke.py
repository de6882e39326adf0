import math

import numpy as np
import pytest

import harmgrad as hg


def test_monomial_frequency_is_twice_the_degree():
    f = hg.HoloField([(0j, 3)])
    assert f.degree == 3
    assert hg.frequency_ball(f, 0j, 0.2) == pytest.approx(6.0, rel=1e-12)


def test_series_frequency_matches_quadrature():
    coeffs = [0.3, -1.2, 0.7]
    n_series = hg.frequency_series(coeffs, 0.25)
    n_quad = hg.frequency_ball(hg.series_field(coeffs), 0j, 0.25, 4096)
    assert n_quad == pytest.approx(n_series, abs=1e-9)


def test_superlevel_area_of_a_monomial_scales_quadratically():
    f = hg.HoloField([(0j, 4)])
    a1 = hg.superlevel_volume(f, 1 / 32, 1.0, radius=0.4)["area"]
    a2 = hg.superlevel_volume(f, 1 / 64, 1.0, radius=0.2)["area"]
    assert math.log2(a1 / a2) == pytest.approx(2.0, abs=1e-9)


def test_cartan_cover_of_a_single_root():
    cover = hg.cartan_cover([(0.1 + 0.2j, 1)], 3.0, 1.0)
    assert cover["content"] > 0
    assert cover["content"] <= 16 * math.exp(-3.0)


def test_beurling_isometry_and_cauchy_of_the_disk():
    n = 128
    h = 4.0 / n
    x = -2.0 + h * (np.arange(n) + 0.5)
    z = x[:, None] + 1j * x[None, :]
    f = np.exp(-np.abs(z - 0.2) ** 2 / 0.02).astype(complex)
    s = hg.beurling_transform(f, complex(x[0], x[0]), h, far_field_correction=False, padded_output=True)
    assert np.linalg.norm(s) * h == pytest.approx(np.linalg.norm(f) * h, rel=1e-10)

    disk = (np.abs(z) < 1).astype(complex)
    c = hg.cauchy_transform(disk, complex(x[0], x[0]), h)
    outside = np.abs(z) > 1.2
    assert np.max(np.abs(c[outside] - 1 / z[outside])) < 5e-3


def test_drift_solver_reproduces_an_exponential():
    k = 1.0
    sol = hg.solve_drift(lambda z: math.exp(-k * z.real), lambda z: (k, 0.0), h=1 / 32)
    u = sol["u"]
    interior = sol["role"] == 1
    n = u.shape[0]
    xs = sol["origin"].real + sol["h"] * np.arange(n)
    exact = np.exp(-k * xs)[:, None] * np.ones((1, n))
    assert np.max(np.abs(u[interior] - exact[interior])) < 1e-3
    assert sol["lambda"] == pytest.approx(k)


def test_errors_surface_as_exceptions():
    with pytest.raises(hg.HarmgradError, match="stencil-unstable"):
        hg.solve_drift(lambda z: 0.0, lambda z: (500.0, 0.0), h=1 / 16)
    with pytest.raises(hg.HarmgradError):
        hg.run_experiment("identity", {"unknown_key": 1})


def test_catalog_and_identity_experiment():
    names = [e["name"] for e in hg.list_experiments()]
    assert len(names) >= 7
    assert "drift-superlevel" in names
    rep = hg.run_experiment("identity", {"samples": 5000}, seed=2)
    assert rep["pass"]
    assert rep["checks"][0]["measured"] <= 1e-12
    assert rep["tables"]["identity"]["columns"] == ["decade_lo", "decade_hi", "count"]
