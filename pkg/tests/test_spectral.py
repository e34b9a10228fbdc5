"""Dense-representation spectral oracle against the Casimir closed form.

The closed form is derived independently from angular momentum
algebra: on the block (j1, j2) with total coupling j, the horizontal
operator has eigenvalue -2 rho (2 j (j+1) + 2 j2 (j2+1) - j1 (j1+1)),
so the spectral gap is attained at (1/2, 0) and (1/2, 1/2) with
-lambda1 = 3 rho / 2.  The oracle itself never uses this formula.
"""

import numpy as np
import pytest

import srlab.spectral as sp


def casimir_eigenvalues(rho, j1, j2):
    out = []
    j = abs(j1 - j2)
    while j <= j1 + j2 + 1e-9:
        lam = -2.0 * rho * (2 * j * (j + 1) + 2 * j2 * (j2 + 1) - j1 * (j1 + 1))
        out.extend([lam] * int(round(2 * j + 1)))
        j += 1.0
    return sorted(out)


def test_spin_matrices_commutation():
    for j in (0.5, 1.0, 1.5):
        jx, jy, jz = sp.spin_matrices(j)
        assert np.allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)
        casimir = jx @ jx + jy @ jy + jz @ jz
        assert np.allclose(casimir, j * (j + 1) * np.eye(jx.shape[0]), atol=1e-12)


def test_trivial_block_is_flat():
    eigs = sp.block_eigenvalues(1.0, 0.0, 0.0)
    assert np.allclose(eigs, 0.0, atol=1e-12)


@pytest.mark.parametrize("j1,j2", [(0.5, 0.0), (0.5, 0.5), (1.0, 0.5), (1.0, 1.0)])
def test_blocks_match_casimir_closed_form(j1, j2):
    got = np.sort(sp.block_eigenvalues(1.3, j1, j2))
    want = np.asarray(casimir_eigenvalues(1.3, j1, j2))
    assert np.allclose(got, want, atol=1e-9)


def test_gap_value_and_location():
    res = sp.spectral_gap(1.0, 2.0)
    assert -res.lambda1 == pytest.approx(1.5, abs=1e-9)
    assert res.attained_at in ((0.5, 0.0), (0.5, 0.5))
    assert res.stable


def test_gap_stability_under_scan_growth():
    r2 = sp.spectral_gap(1.0, 2.0)
    r3 = sp.spectral_gap(1.0, 3.0)
    assert abs(r2.lambda1 - r3.lambda1) <= 1e-9


def test_gap_scales_linearly_in_rho():
    base = sp.spectral_gap(1.0, 2.0).lambda1
    for rho in (0.5, 2.0, 3.5):
        assert sp.spectral_gap(rho, 2.0).lambda1 == pytest.approx(rho * base, rel=1e-12)


def test_bounds_hold():
    lam1, alpha_chk, gap_chk = sp.spectral_gap_su2_pair(1.0, 2.0)
    assert -lam1 == pytest.approx(1.5, abs=1e-9)
    assert alpha_chk["bound"] == pytest.approx(0.8, abs=1e-9)
    assert gap_chk["bound"] == pytest.approx(6.0 / 7.0, abs=1e-9)
    assert alpha_chk["margin"] >= 0.0
    assert gap_chk["margin"] >= 0.0


def test_jmax_validation():
    with pytest.raises(ValueError):
        sp.spectral_gap(1.0, 0.5)
