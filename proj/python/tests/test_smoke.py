import cmath
import math

import numpy as np
import pytest

import cmc


def test_cylinder_dressing_matches_closed_form():
    fg = cmc.dress(cmc.LoopMatrix.identity(0.5), cmc.ZGrid.square(4, 4, 0.5))
    grid = fg.grid
    for j in range(grid.ny):
        for i in range(grid.nx):
            z = grid.at(i, j)
            F = fg.frames[j * grid.nx + i]
            for k in range(6):
                lam = cmath.exp(1j * (0.3 + k))
                assert np.abs(F(lam) - cmc.cylinder_value(z, lam)).max() < 1e-10
    xyz = cmc.surface_vertices(fg)
    assert xyz.shape == (16, 3)


def test_iwasawa_round_trip():
    a = np.array([[0, 0.2 + 0.1j], [-0.1j, 0]])
    g = cmc.make_loop({0: np.eye(2, dtype=complex), -1: a, 1: a.T}, 0.5, True)
    res = cmc.iwasawa(g)
    assert res.residual < 1e-9
    lam = 0.5 * cmath.exp(0.7j)
    assert np.abs(g(lam) - res.unitary_part(lam) @ res.plus_part(lam)).max() < 1e-9
    back = cmc.loop_from_json(cmc.loop_to_json(g))
    assert np.abs(back(lam) - g(lam)).max() == 0.0


def test_genus_one_periods_against_elliptic_integrals():
    s = cmc.build_curve([0.25])
    assert s.genus() == 1
    c = cmc.omega1_coeffs(s)
    r = 0.25
    K, E = cmc.elliptic_KE(math.sqrt(1 - r * r))
    assert abs(c[1] - (-E / (2 * r * K))) < 1e-10
    tau = cmc.period_matrix(cmc.build_curve([0.3 + 0.2j, -0.4]))
    assert np.abs(tau - tau.T).max() < 1e-8
    assert np.linalg.eigvalsh(tau.imag).min() > 0


def test_closing_detector_with_python_callable():
    l0 = cmath.exp(0.4j)
    res = cmc.closing_test(lambda l: -(2 - l / l0 - l0 / l), l0)
    assert res.verdict == "chi_is_pm_I"
    assert res.order == 2


def test_construct_and_finite_type():
    fam = cmc.construct('{"curve": {"inner_points": [0.25]}, "m": [0]}')
    assert fam.beta_at_branch < 1e-8
    cert = fam.certify_finite_type(2, [0.1 + 0.05j])
    assert cert.trivial
    assert cert.pole_order == 7


def test_errors_and_cli():
    with pytest.raises(cmc.CmcError) as e:
        cmc.build_curve([1.5])
    assert e.value.code
    code, doc, _ = cmc.cli("genus1-report", "--r", "0.5")
    assert code == 0
    assert doc["result"]["rows"][0]["torus_verdict"] == "no-torus"
    code, doc, err = cmc.cli("periods", "--curve", "no_such_file.json")
    assert code == 2
    assert "FileNotFound" in err
