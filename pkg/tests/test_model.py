"""Twisted-system assembly: validation, twist rows, first integrals.

Matrix inverses are cross-checked against a direct 3x3 adjugate oracle,
and inverse derivatives against dual-number derivatives of the entries
combined with the analytic rule d(S^{-1}) = -S^{-1}(dS)S^{-1}.
"""

import math
import random

import numpy as np
import pytest

from blocksep import expr
from blocksep.model import (
    BlockIndexError, BlockStructure, DimensionMismatchError,
    ForeignVariableError, NaturalBlock, PhasePoint, ProbePlan,
    SingularMatrixError, StackelMatrix, TwistedSystem, block_energy,
    build_system, first_integral, hamiltonian, inverse_derivative,
    matrix_derivative, matrix_values, reduced_hamiltonian,
    separation_constants, twist_rows,
)


from conftest import PENDULA_C, PENDULA_P0, make_pendula_like

pendula_like = make_pendula_like

P0 = PENDULA_P0
C1, C2, C3 = PENDULA_C


def adjugate3(S):
    """Direct cofactor inverse of a 3x3 matrix (independent oracle)."""
    S = np.asarray(S, dtype=float)
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(S, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1]
                                           - minor[0, 1] * minor[1, 0])
    det = S[0, 0] * cof[0, 0] + S[0, 1] * cof[0, 1] + S[0, 2] * cof[0, 2]
    return cof.T / det, det


# ---------------------------------------------------------------------------
# construction and validation

def test_pendula_like_builds():
    sys = pendula_like()
    assert sys.n == 3
    assert sys.dim == 3
    assert len(sys.probes) == 21  # declared point + 20 box samples


def test_foreign_variable_in_stackel_row():
    structure = BlockStructure((1, 1, 1), (("q1",), ("q2",), ("q3",)))
    stackel = StackelMatrix((
        ("2", "1+q1", "2*q1^2+2"),
        ("3", "q1", "q2^3+2"),  # q1 leaks into row 2
        ("4", "q3", "q3^2+1"),
    ))
    blocks = tuple(NaturalBlock((("1",),), "0") for _ in range(3))
    with pytest.raises(ForeignVariableError) as exc:
        build_system(structure, stackel, blocks, None)
    assert "S[2][2]" in str(exc.value)
    assert "q1" in str(exc.value)


def test_foreign_variable_in_potential():
    structure = BlockStructure((1, 1), (("q1",), ("q2",)))
    stackel = StackelMatrix((("1", "0"), ("0", "1")))
    blocks = (NaturalBlock((("1",),), "cos(q2)"),
              NaturalBlock((("1",),), "0"))
    with pytest.raises(ForeignVariableError) as exc:
        build_system(structure, stackel, blocks, None)
    assert "block 1 potential" in str(exc.value)


def test_dimension_mismatches():
    structure = BlockStructure((1, 1), (("q1",), ("q2",)))
    with pytest.raises(DimensionMismatchError):
        build_system(structure, StackelMatrix((("1",),)),
                     (NaturalBlock((("1",),), "0"),) * 2, None)
    with pytest.raises(DimensionMismatchError):
        build_system(structure, StackelMatrix((("1", "0"), ("0", "1"))),
                     (NaturalBlock((("1",),), "0"),), None)
    with pytest.raises(DimensionMismatchError):
        BlockStructure((1, 2), (("q1",), ("q2",)))
    with pytest.raises(DimensionMismatchError):
        BlockStructure((1, 1), (("q1",), ("q1",)))


def test_metric_symmetry_enforced():
    with pytest.raises(DimensionMismatchError):
        NaturalBlock((("1", "q1"), ("0", "1")), "0")


def test_singular_probe_rejected():
    structure = BlockStructure((1, 1), (("q1",), ("q2",)))
    stackel = StackelMatrix((("1", "1"), ("1", "1")))  # identically singular
    blocks = (NaturalBlock((("1",),), "0"), NaturalBlock((("1",),), "0"))
    probes = ProbePlan(points=({"q1": 0.0, "q2": 0.0},))
    with pytest.raises(SingularMatrixError):
        build_system(structure, stackel, blocks, probes)


def test_identity_stackel():
    structure = BlockStructure((1, 1, 1), (("q1",), ("q2",), ("q3",)))
    stackel = StackelMatrix((("1", "0", "0"), ("0", "1", "0"),
                             ("0", "0", "1")))
    blocks = (NaturalBlock((("1",),), "-cos(q1)/2"),
              NaturalBlock((("1",),), "q2^2"),
              NaturalBlock((("1",),), "0"))
    sys = build_system(structure, stackel, blocks,
                       ProbePlan(points=({"q1": 0, "q2": 0, "q3": 0},)))
    pt = PhasePoint((0.3, 0.5, -0.2), (1.0, 2.0, 3.0))
    tw = twist_rows(sys, pt)
    assert np.allclose(tw.matrix, np.eye(3))
    assert np.allclose(tw.matrix[0], [1.0, 0.0, 0.0])
    # with S = I the combinations collapse to the block energies
    for a in (1, 2, 3):
        assert first_integral(sys, a, pt) == pytest.approx(
            block_energy(sys, a, pt), rel=1e-14)
    c = separation_constants(sys, pt)
    for r in (1, 2, 3):
        assert c[r - 1] == pytest.approx(block_energy(sys, r, pt), rel=1e-14)
    assert hamiltonian(sys, pt) == pytest.approx(block_energy(sys, 1, pt))


# ---------------------------------------------------------------------------
# twist rows

def test_twist_rows_at_origin_vs_adjugate():
    sys = pendula_like()
    pt = PhasePoint((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    tw = twist_rows(sys, pt)
    S = np.array([[2, 1, 2], [3, 0, 2], [4, 0, 1]], dtype=float)
    Minv, det = adjugate3(S)
    assert det == pytest.approx(5.0)
    assert np.allclose(tw.matrix, Minv, atol=1e-14)
    assert np.allclose(tw.matrix[0], [0.0, -0.2, 0.4], atol=1e-14)
    assert tw.warning is None


def test_twist_rows_product_identity_at_probes():
    sys = pendula_like()
    for env in sys.probes:
        q = [env[c] for c in sys.structure.names]
        tw = twist_rows(sys, q)
        S = matrix_values(sys.stackel.entries, env)
        assert np.max(np.abs(S @ tw.matrix - np.eye(3))) <= 1e-12


def test_determinant_against_cofactor_oracle():
    # the determinant's value 5 and gradient (5, -6, 2) at the origin
    # pin the matrix data; nearby, compare against cofactor expansion
    sys = pendula_like()
    env0 = sys.env([0.0, 0.0, 0.0])
    S0 = matrix_values(sys.stackel.entries, env0)
    assert np.linalg.det(S0) == pytest.approx(5.0, rel=1e-14)
    h = 1e-7
    grad = []
    for k in range(3):
        qp = [0.0] * 3
        qm = [0.0] * 3
        qp[k] = h
        qm[k] = -h
        dp = np.linalg.det(matrix_values(sys.stackel.entries, sys.env(qp)))
        dm = np.linalg.det(matrix_values(sys.stackel.entries, sys.env(qm)))
        grad.append((dp - dm) / (2 * h))
    assert np.allclose(grad, [5.0, -6.0, 2.0], atol=1e-6)
    rng = random.Random(5)
    for _ in range(20):
        q = [rng.uniform(-0.3, 0.3) for _ in range(3)]
        S = matrix_values(sys.stackel.entries, sys.env(q))
        _, det_oracle = adjugate3(S)
        assert np.linalg.det(S) == pytest.approx(det_oracle, rel=1e-12)


def test_ill_conditioned_warning_and_error():
    structure = BlockStructure((1, 1), (("q1",), ("q2",)))
    blocks = (NaturalBlock((("1",),), "0"), NaturalBlock((("1",),), "0"))
    # condition ~ 4/eps: eps = 1e-10 warns, eps = 1e-13 errors
    warn_sys = build_system(
        structure, StackelMatrix((("1", "1"), ("1", "1.0000000001"))),
        blocks, ProbePlan(points=({"q1": 0, "q2": 0},)))
    tw = twist_rows(warn_sys, PhasePoint((0, 0), (0, 0)))
    assert tw.warning is not None
    assert tw.cond > 1e8
    bad = build_system(
        structure, StackelMatrix((("1", "1"), ("1", "1.0000000000001"))),
        blocks, None)
    with pytest.raises(SingularMatrixError):
        twist_rows(bad, PhasePoint((0, 0), (0, 0)))


# ---------------------------------------------------------------------------
# energies and first integrals

def test_block_energy_examples():
    sys = pendula_like()
    rest = PhasePoint((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    assert block_energy(sys, 1, rest) == -0.5
    moving = PhasePoint((0.0, 0.0, 0.0), (0.0, 0.0, 2.0))
    assert block_energy(sys, 3, moving) == 2.0
    assert block_energy(sys, 3, rest) == 0.0


def test_block_energy_index_range():
    sys = pendula_like()
    with pytest.raises(BlockIndexError):
        block_energy(sys, 0, P0)
    with pytest.raises(BlockIndexError):
        block_energy(sys, 4, P0)
    with pytest.raises(BlockIndexError):
        first_integral(sys, 4, P0)


def test_reference_separation_constants():
    sys = pendula_like()
    assert hamiltonian(sys, P0) == pytest.approx(C1, abs=1e-8)
    assert first_integral(sys, 2, P0) == pytest.approx(C2, abs=1e-8)
    assert first_integral(sys, 3, P0) == pytest.approx(C3, abs=1e-8)
    c = separation_constants(sys, P0)
    assert np.allclose(c, [C1, C2, C3], atol=1e-8)
    assert first_integral(sys, 1, P0) == pytest.approx(hamiltonian(sys, P0))


def test_reconstruction_identity():
    # H_r = S[r][a] c_a at any phase point, by construction of c
    sys = pendula_like()
    rng = random.Random(11)
    for _ in range(100):
        q = [rng.uniform(-0.3, 0.3) for _ in range(3)]
        p = [rng.uniform(-1.0, 1.0) for _ in range(3)]
        pt = PhasePoint(q, p)
        c = separation_constants(sys, pt)
        env = sys.env(q)
        S = matrix_values(sys.stackel.entries, env)
        for r in range(1, 4):
            h_r = block_energy(sys, r, pt)
            assert abs(h_r - float(S[r - 1] @ c)) <= 1e-10


def test_reduced_hamiltonian_vanishes_at_defining_point():
    sys = pendula_like()
    c = separation_constants(sys, P0)
    for r in (1, 2, 3):
        assert abs(reduced_hamiltonian(sys, r, c, P0)) <= 1e-13


def test_reduced_hamiltonian_c3_coefficient():
    # partial of the reduced block-1 energy with respect to c3 is
    # -(2 q1^2 + 2), read off by differencing in c3
    sys = pendula_like()
    rng = random.Random(3)
    for _ in range(10):
        q1 = rng.uniform(-1, 1)
        pt = PhasePoint((q1, 0.1, -0.2), (0.3, 0.0, 0.0))
        base = reduced_hamiltonian(sys, 1, (0.0, 0.0, 0.0), pt)
        bumped = reduced_hamiltonian(sys, 1, (0.0, 0.0, 1.0), pt)
        assert bumped - base == pytest.approx(-(2 * q1 ** 2 + 2), rel=1e-12)


def test_reduced_hamiltonian_validates_c_length():
    sys = pendula_like()
    with pytest.raises(DimensionMismatchError):
        reduced_hamiltonian(sys, 1, (0.0, 0.0), P0)


# ---------------------------------------------------------------------------
# derivative identity for the twist rows

def test_inverse_derivative_identity():
    # sum_s d(alpha^s) S[s][j] = -alpha^r dS[r][j] for coordinates in
    # block r: the twist-row derivative collapses onto its own block.
    sys = pendula_like()
    rng = random.Random(17)
    names = sys.structure.names
    worst = 0.0
    for _ in range(30):
        q = [rng.uniform(-0.3, 0.3) for _ in range(3)]
        env = sys.env(q)
        S = matrix_values(sys.stackel.entries, env)
        M = np.linalg.inv(S)
        for k, name in enumerate(names):
            r = sys.structure.block_of(k)
            dS = matrix_derivative(sys.stackel.entries, env, name)
            dM = inverse_derivative(M, dS)
            for j in range(3):
                lhs = float(dM[0] @ S[:, j])
                rhs = -M[0, r - 1] * dS[r - 1, j]
                worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-9


def test_inverse_derivative_vs_finite_difference():
    sys = pendula_like()
    q = [0.11, -0.07, 0.23]
    h = 1e-6
    for k, name in enumerate(sys.structure.names):
        env = sys.env(q)
        S = matrix_values(sys.stackel.entries, env)
        M = np.linalg.inv(S)
        dS = matrix_derivative(sys.stackel.entries, env, name)
        dM = inverse_derivative(M, dS)
        qp = list(q)
        qm = list(q)
        qp[k] += h
        qm[k] -= h
        Mp = np.linalg.inv(matrix_values(sys.stackel.entries, sys.env(qp)))
        Mm = np.linalg.inv(matrix_values(sys.stackel.entries, sys.env(qm)))
        fd = (Mp - Mm) / (2 * h)
        assert np.max(np.abs(dM - fd)) <= 1e-7


# ---------------------------------------------------------------------------
# degenerate single-block case

def test_single_block_system():
    structure = BlockStructure((2,), (("u", "v"),))
    stackel = StackelMatrix((("2+u^2",),))
    blocks = (NaturalBlock((("1", "0"), ("0", "1")), "u*v"),)
    sys = build_system(structure, stackel, blocks,
                       ProbePlan(points=({"u": 0.0, "v": 0.0},)))
    pt = PhasePoint((0.5, -0.5), (1.0, 2.0))
    h1 = block_energy(sys, 1, pt)
    assert hamiltonian(sys, pt) == pytest.approx(h1 / (2 + 0.25), rel=1e-14)
    with pytest.raises(BlockIndexError):
        first_integral(sys, 2, pt)


def test_phase_point_roundtrip():
    pt = PhasePoint((1.0, 2.0), (3.0, 4.0))
    arr = pt.as_array()
    assert np.allclose(arr, [1, 2, 3, 4])
    assert PhasePoint.from_array(arr) == pt
    with pytest.raises(DimensionMismatchError):
        PhasePoint((1.0,), (1.0, 2.0))
