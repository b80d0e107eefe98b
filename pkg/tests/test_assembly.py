import warnings

import numpy as np
import pytest
from scipy.integrate import trapezoid

from stlsbem.assembly import (assemble_dtV, assemble_dual_mass, assemble_mass_L2, assemble_MHT_V,
                              assemble_rhs, assemble_V, build_system, default_mht_modes,
                              dump_matrix, normalize_formulation)
from stlsbem.cases import get_case
from stlsbem.kernel_ops import PiecewiseConstant, apply_V, mht_frequencies
from stlsbem.mesh import LateralMesh, TemporalMesh, subdivide, uniform_mesh
from stlsbem.quadrature import integrate_intervals

from conftest import ZERO, linear_data, random_mesh


def single(T=1.0, L=1.0):
    return LateralMesh(TemporalMesh([0, T]), TemporalMesh([0, T]), L)


def test_mass_examples():
    assert assemble_mass_L2(uniform_mesh(2.0, 2)).tolist() == [1, 1, 1, 1]
    mesh = LateralMesh(TemporalMesh([0, 0.5, 2]), TemporalMesh([0, 0.5, 2]), 1.0)
    assert assemble_mass_L2(mesh).tolist() == [0.5, 1.5, 0.5, 1.5]
    assert assemble_mass_L2(single(3.0)).tolist() == [3.0, 3.0]


def test_V_examples():
    Vm = assemble_V(subdivide(single(1.0, L=1.0), 1))
    assert Vm[0, 0] == pytest.approx(0.25)
    assert Vm[1, 0] == 0.0  # the shifted ramp starts at t = L = T
    Vm = assemble_V(subdivide(single(1.0, L=2.0), 3))
    assert Vm[0, 0] == pytest.approx(1 / 36)
    # trial element after the test element
    mesh = LateralMesh(TemporalMesh([0, 1, 2]), TemporalMesh([0, 2]), 5.0)
    assert assemble_V(subdivide(mesh, 1))[0, 1] == 0.0


def test_dtV_examples():
    mesh = uniform_mesh(4.0, 4, L=1.0)
    D = assemble_dtV(subdivide(mesh, 1))
    assert D[2, 2] == pytest.approx(0.5)
    assert D[0, 3] == 0.0
    # trial (0,1) on side 0, test (L, L+1) on side L
    assert D[4 + 1, 0] == pytest.approx(0.5)


def test_V_is_ramp_mean(rng):
    """Entry (j, l) equals |tau_j| times the mean of V phi_l over tau_j."""
    for _ in range(5):
        coarse = random_mesh(rng, T=2.0, L=0.8, n_max=5)
        pair = subdivide(coarse, 2)
        Vm = assemble_V(pair)
        _, c, d = pair.fine.element_arrays()
        fs, _, _ = pair.fine.element_arrays()
        for l in range(coarse.dofs):
            e = np.zeros(coarse.dofs)
            e[l] = 1.0
            w = PiecewiseConstant.from_vector(coarse, e)
            for j in range(pair.fine.dofs):
                ref = integrate_intervals(lambda t: apply_V(w, int(fs[j]), t), [c[j]], [d[j]],
                                          order=4, breaks=tuple(coarse.sides[0].nodes) +
                                          tuple(coarse.sides[1].nodes) +
                                          tuple(coarse.sides[0].nodes + 0.8) +
                                          tuple(coarse.sides[1].nodes + 0.8))[0]
                assert Vm[j, l] == pytest.approx(ref, abs=1e-14)


def test_dtV_columns_reconstruct_V(rng):
    """Summing dtV entries over fine elements up to a node gives V phi_l there."""
    coarse = random_mesh(rng, T=3.0, L=1.0, n_max=6)
    pair = subdivide(coarse, 3)
    Dm = assemble_dtV(pair)
    for s, tm in enumerate(pair.fine.sides):
        rows = slice(pair.fine.offset(s), pair.fine.offset(s) + tm.n_elements)
        partial = np.cumsum(Dm[rows], axis=0)
        for l in range(coarse.dofs):
            e = np.zeros(coarse.dofs)
            e[l] = 1.0
            w = PiecewiseConstant.from_vector(coarse, e)
            np.testing.assert_allclose(partial[:, l], apply_V(w, s, tm.right), rtol=0, atol=1e-14)


def test_uncoupled_blocks():
    pair = subdivide(uniform_mesh(4.0, 4, L=1.0), 2)
    VD = assemble_V(pair, couple=False)
    assert np.all(VD[:8, 4:] == 0) and np.all(VD[8:, :4] == 0)
    assert np.array_equal(VD[:8, :4], assemble_V(pair)[:8, :4])


def test_mht_zero_column_and_bad_K():
    pair = subdivide(uniform_mesh(2.0, 2, L=5.0), 1)
    Vm = assemble_MHT_V(pair, 64, check=False)
    # the opposite-side coupling vanishes for L > T
    assert np.all(Vm[:2, 2:] == 0)
    with pytest.raises(ValueError):
        assemble_MHT_V(pair, 0)


def test_mht_truncation_self_convergence():
    pair = subdivide(single(2.0, L=2.0), 1)
    a = assemble_MHT_V(pair, 200, check=False)[0, 0]
    b = assemble_MHT_V(pair, 400, check=False)[0, 0]
    assert abs(a - b) / abs(b) <= 1e-4


def test_mht_single_mode_parseval():
    """sin(alpha_0 t) has unit coefficient on mode 0 and nothing else."""
    T = 2.0
    alpha = mht_frequencies(4, T)
    t = np.linspace(0, T, 20001)
    for k in range(4):
        coef = 2 / T * trapezoid(np.sin(alpha[0] * t) * np.sin(alpha[k] * t), t)
        assert coef == pytest.approx(1.0 if k == 0 else 0.0, abs=1e-6)


def test_mht_matrix_matches_sine_cosine_pairing():
    """<H_T V phi, psi> for coarse=fine=(0,T) against an independent quadrature."""
    T = 2.0
    K = 400
    pair = subdivide(single(T, L=T), 1)
    alpha = mht_frequencies(K, T)
    t = np.linspace(0, T, 40001)
    ramp = 0.5 * t
    fk = np.array([2 / T * trapezoid(ramp * np.sin(a * t), t) for a in alpha])
    ref = np.sum(fk * np.sin(alpha * T) / alpha)
    assert assemble_MHT_V(pair, K, check=False)[0, 0] == pytest.approx(ref, rel=1e-5)


def test_mht_warns_when_truncation_is_coarse():
    pair = subdivide(uniform_mesh(6.0, 16, L=3.0), 2)
    with pytest.warns(RuntimeWarning):
        assemble_MHT_V(pair, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assemble_MHT_V(pair, default_mht_modes(pair))


def test_rhs_examples():
    fine = single(1.0, L=3.0)
    assert assemble_rhs(fine, ZERO, "standard").tolist() == [0.0, 0.0]
    assert assemble_rhs(fine, linear_data(), "standard")[0] == pytest.approx(0.5)
    assert assemble_rhs(fine, linear_data(), "energetic")[0] == pytest.approx(1.0)
    no_derivative = get_case("g1").density
    with pytest.raises(ValueError):
        assemble_rhs(fine, no_derivative, "energetic")
    with pytest.raises(ValueError):
        assemble_rhs(fine, linear_data(), "galerkin")


def test_direct_rhs_uses_shifted_other_side():
    g = get_case("g1").g
    fine = uniform_mesh(6.0, 6, L=3.0)
    r = assemble_rhs(fine, g, "direct")
    own = g.integrate_derivative(1, fine.sideL.left, fine.sideL.right)
    # on side L the shifted side-0 derivative equals the own derivative: they cancel
    np.testing.assert_allclose(r[6:], 0.5 * own - 0.5 * own, atol=1e-14)
    assert normalize_formulation("direct-energetic") == "direct"


def test_dual_mass_single_element():
    for T in (1.0, 2.5):
        M = assemble_dual_mass(single(T))
        assert M[0, 0] == pytest.approx(T ** 3 / 3, rel=1e-14)
        alpha = mht_frequencies(200000, T)
        series = 2 / T * np.sum(alpha ** -4.0)
        assert M[0, 0] == pytest.approx(series, rel=1e-6)
        assert M[0, 1] == 0.0


def test_dual_mass_symmetric_and_definite(rng):
    M = assemble_dual_mass(uniform_mesh(2.0, 2))
    assert np.all(np.linalg.eigvalsh(M) > 0)
    for _ in range(10):
        M = assemble_dual_mass(random_mesh(rng, T=2.0))
        assert np.array_equal(M, M.T)
        assert np.linalg.eigvalsh(M)[0] > 0


def test_build_system_shapes():
    pair = subdivide(uniform_mesh(6.0, 4, L=3.0), 3)
    sys = build_system(pair, get_case("g2").g, "standard")
    assert sys.V.shape == (24, 8) and sys.D.shape == (24,) and sys.rhs.shape == (24,)
    assert np.all(sys.D > 0)


def test_dump_matrix_round_trip(tmp_path, rng):
    A = rng.standard_normal((3, 4))
    dump_matrix(tmp_path / "a.txt", A)
    assert np.array_equal(np.loadtxt(tmp_path / "a.txt"), A)
