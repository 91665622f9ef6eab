"""Tensor calculus for twisted block metrics.

Verification toolbox: Poisson brackets of momentum-quadratic phase
functions, Christoffel symbols and Riemann curvature, Killing-equation
residuals, torsion (Nijenhuis) and Haantjes-condition residuals, the
three normality contractions, and the residuals of the block
eigenvalue equations that characterize separable twists.

Index conventions, used throughout and nowhere redefined:
  * antisymmetrization over a bracketed index pair carries weight 1/2,
    over a triple weight 1/6; symmetrization over a triple 1/6 as well
    (so a cyclic sum over an already antisymmetric pair keeps 1/3);
  * array layouts are christoffel[i,j,k] = Gamma^i_jk,
    riemann[i,j,k,l] = R^i_jkl, torsion[i,j,k] = N^i_jk;
  * a TensorField2 grid is entries[i][j] = T^ij, T_ij or T^i_j
    according to its variance tag.

Residual operations return max-norms, never booleans; thresholds are
the caller's business.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as _expr
from . import model as _model
from .expr import Expression
from .model import PhasePoint, StackelMatrix, TwistedSystem


class GeometryError(Exception):
    """Base class for tensor-calculus failures."""


class DegenerateMetricError(GeometryError):
    """The metric is singular (or numerically unusable) at the point."""


class VanishingTwistError(GeometryError):
    """A twist function is zero where a formula divides by it."""


class VarianceError(GeometryError):
    """Operation applied to a tensor with the wrong variance tag."""


_VARIANCES = ("contravariant", "covariant", "mixed")


def _env_of(coords, point) -> dict:
    """Build an evaluation environment from a point specification.

    Accepts a dict (must bind every coordinate), a PhasePoint (its q
    part is used), or a plain sequence ordered like ``coords``.
    """
    if isinstance(point, dict):
        missing = [c for c in coords if c not in point]
        if missing:
            raise GeometryError(f"point does not bind {missing[0]!r}")
        return {c: float(point[c]) for c in coords}
    if isinstance(point, PhasePoint):
        point = point.q
    vals = tuple(float(x) for x in point)
    if len(vals) != len(coords):
        raise GeometryError(
            f"point has {len(vals)} coordinates, expected {len(coords)}")
    return dict(zip(coords, vals))


def _grid_of(entries, n: int | None = None):
    rows = tuple(tuple(_model._as_expression(e) for e in row)
                 for row in entries)
    size = len(rows)
    if any(len(row) != size for row in rows):
        raise GeometryError("tensor grid is not square")
    if n is not None and size != n:
        raise GeometryError(
            f"tensor grid is {size}x{size}, expected {n}x{n}")
    return rows


class MetricField:
    """Contravariant metric components G^ij with honest derivatives.

    Either wraps an explicit expression grid, or is assembled from a
    TwistedSystem as the block-diagonal G^ij = alpha^r g_r^ij.  In the
    second form the derivatives of alpha come from the analytic
    identities d(S^-1) = -S^-1 (dS) S^-1 and its product-rule
    derivative, so no finite differencing is ever involved.
    """

    def __init__(self, coords, grid=None, system: TwistedSystem | None
                 = None):
        self.coords = tuple(coords)
        self._system = system
        if (grid is None) == (system is None):
            raise GeometryError(
                "provide exactly one of an expression grid or a system")
        if grid is not None:
            rows = _grid_of(grid, len(self.coords))
            for i in range(len(rows)):
                for j in range(i):
                    if rows[i][j] != rows[j][i]:
                        raise GeometryError(
                            f"metric entry G[{i + 1}][{j + 1}] is not the "
                            f"mirror of G[{j + 1}][{i + 1}]")
            self._grid = rows
        else:
            self._grid = None

    @classmethod
    def from_expressions(cls, coords, grid) -> "MetricField":
        return cls(coords, grid=grid)

    @classmethod
    def from_system(cls, sys: TwistedSystem) -> "MetricField":
        return cls(sys.structure.names, system=sys)

    @property
    def n(self) -> int:
        return len(self.coords)

    # -- twist-backed pieces ------------------------------------------------

    def _twist_sm(self, env):
        sys = self._system
        S = _model.matrix_values(sys.stackel.entries, env)
        M, _, _ = _model.invert_with_condition(
            S, point=[env[c] for c in self.coords])
        return S, M

    def _assemble(self, env, alpha_like, block_grids) -> np.ndarray:
        sys = self._system
        out = np.zeros((self.n, self.n))
        for r in range(sys.n):
            idx = list(sys.structure.block_range(r + 1))
            for i, gi in enumerate(idx):
                for j, gj in enumerate(idx):
                    out[gi, gj] = alpha_like[r] * block_grids[r][i, j]
        return out

    # -- public evaluation --------------------------------------------------

    def contravariant(self, point) -> np.ndarray:
        env = _env_of(self.coords, point)
        if self._grid is not None:
            return _model.matrix_values(self._grid, env)
        sys = self._system
        _, M = self._twist_sm(env)
        g_vals = [_model.matrix_values(blk.metric, env)
                  for blk in sys.blocks]
        return self._assemble(env, M[0], g_vals)

    def derivative(self, point, name: str) -> np.ndarray:
        """d/d name of the contravariant components."""
        env = _env_of(self.coords, point)
        if self._grid is not None:
            return _model.matrix_derivative(self._grid, env, name)
        sys = self._system
        _, M = self._twist_sm(env)
        alpha = M[0]
        dS = _model.matrix_derivative(sys.stackel.entries, env, name)
        dalpha = -(alpha @ dS) @ M
        out = np.zeros((self.n, self.n))
        for r in range(sys.n):
            idx = list(sys.structure.block_range(r + 1))
            g = _model.matrix_values(sys.blocks[r].metric, env)
            dg = _model.matrix_derivative(sys.blocks[r].metric, env, name)
            for i, gi in enumerate(idx):
                for j, gj in enumerate(idx):
                    out[gi, gj] = dalpha[r] * g[i, j] + alpha[r] * dg[i, j]
        return out

    def second_derivative(self, point, n1: str, n2: str) -> np.ndarray:
        env = _env_of(self.coords, point)
        if self._grid is not None:
            return _model.matrix_second_derivative(self._grid, env, n1, n2)
        sys = self._system
        _, M = self._twist_sm(env)
        alpha = M[0]
        dS1 = _model.matrix_derivative(sys.stackel.entries, env, n1)
        dS2 = _model.matrix_derivative(sys.stackel.entries, env, n2)
        d2S = _model.matrix_second_derivative(sys.stackel.entries, env,
                                              n1, n2)
        da1 = -(alpha @ dS1) @ M
        da2 = -(alpha @ dS2) @ M
        d2a = alpha @ (dS1 @ M @ dS2 + dS2 @ M @ dS1 - d2S) @ M
        out = np.zeros((self.n, self.n))
        for r in range(sys.n):
            idx = list(sys.structure.block_range(r + 1))
            g = _model.matrix_values(sys.blocks[r].metric, env)
            g1 = _model.matrix_derivative(sys.blocks[r].metric, env, n1)
            g2 = _model.matrix_derivative(sys.blocks[r].metric, env, n2)
            g12 = _model.matrix_second_derivative(sys.blocks[r].metric, env,
                                                  n1, n2)
            for i, gi in enumerate(idx):
                for j, gj in enumerate(idx):
                    out[gi, gj] = (d2a[r] * g[i, j] + da1[r] * g2[i, j]
                                   + da2[r] * g1[i, j] + alpha[r] * g12[i, j])
        return out

    def covariant(self, point) -> np.ndarray:
        G = self.contravariant(point)
        det = float(np.linalg.det(G))
        if det == 0.0 or not np.isfinite(det):
            raise DegenerateMetricError(
                "metric degenerate at the given point")
        try:
            return np.linalg.inv(G)
        except np.linalg.LinAlgError as ex:
            raise DegenerateMetricError(str(ex)) from ex


@dataclass(frozen=True)
class TensorField2:
    """Rank-2 tensor field as an expression grid with a variance tag.

    ``metric`` is only needed for numeric index shuffling and for the
    operations that must convert variance on the fly.
    """

    coords: tuple
    grid: tuple
    variance: str
    metric: MetricField | None = None
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        rows = _grid_of(self.grid, len(self.coords))
        object.__setattr__(self, "grid", rows)
        if self.variance not in _VARIANCES:
            raise VarianceError(
                f"unknown variance {self.variance!r}; expected one of "
                f"{_VARIANCES}")
        if self.symmetric:
            n = len(rows)
            for i in range(n):
                for j in range(i):
                    if rows[i][j] != rows[j][i]:
                        raise GeometryError(
                            f"entry [{i + 1}][{j + 1}] is not the mirror of "
                            f"[{j + 1}][{i + 1}] in a tensor tagged "
                            "symmetric")

    @property
    def n(self) -> int:
        return len(self.coords)

    def values(self, point) -> np.ndarray:
        env = _env_of(self.coords, point)
        return _model.matrix_values(self.grid, env)

    def derivative_values(self, point, name: str) -> np.ndarray:
        env = _env_of(self.coords, point)
        return _model.matrix_derivative(self.grid, env, name)

    def _need_metric(self):
        if self.metric is None:
            raise GeometryError(
                "index shuffling needs an associated metric")
        return self.metric

    def lowered(self, point) -> np.ndarray:
        """Covariant components at the point."""
        T = self.values(point)
        if self.variance == "covariant":
            return T
        g = self._need_metric().covariant(point)
        if self.variance == "contravariant":
            return g @ T @ g
        return g @ T

    def raised(self, point) -> np.ndarray:
        """Contravariant components at the point."""
        T = self.values(point)
        if self.variance == "contravariant":
            return T
        G = self._need_metric().contravariant(point)
        if self.variance == "covariant":
            return G @ T @ G
        return T @ G

    def mixed_at(self, point) -> np.ndarray:
        """Mixed components T^i_j at the point."""
        T = self.values(point)
        if self.variance == "mixed":
            return T
        if self.variance == "contravariant":
            g = self._need_metric().covariant(point)
            return T @ g
        G = self._need_metric().contravariant(point)
        return G @ T


def identity_tensor(coords, metric: MetricField | None = None,
                    variance: str = "mixed") -> TensorField2:
    n = len(coords)
    grid = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    return TensorField2(tuple(coords), grid, variance, metric,
                        symmetric=True)


# ---------------------------------------------------------------------------
# phase-space scalars and Poisson brackets

@dataclass(frozen=True)
class PhaseScalar:
    """F = (1/2) K^ij p_i p_j + L^i p_i + W on the phase space.

    Quadratic in momenta by construction; the momentum gradient is
    analytic, the position gradient comes from derivatives of the
    coefficient expressions.
    """

    coords: tuple
    tensor: TensorField2 | None = None
    linear: tuple | None = None
    scalar: object = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        n = len(self.coords)
        if self.tensor is not None:
            if self.tensor.variance != "contravariant":
                raise VarianceError(
                    "the quadratic coefficient tensor must be "
                    "contravariant")
            if self.tensor.n != n:
                raise GeometryError(
                    f"coefficient tensor is {self.tensor.n}-dimensional, "
                    f"expected {n}")
        if self.linear is not None:
            lin = tuple(_model._as_expression(e) for e in self.linear)
            if len(lin) != n:
                raise GeometryError(
                    f"linear coefficient has {len(lin)} entries, "
                    f"expected {n}")
            object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "scalar",
                           _model._as_expression(self.scalar))

    def value(self, point: PhasePoint) -> float:
        env = _env_of(self.coords, point)
        p = np.asarray(point.p, dtype=float)
        out = _expr.evaluate(self.scalar, env)
        if self.linear is not None:
            out += sum(_expr.evaluate(e, env) * p[i]
                       for i, e in enumerate(self.linear))
        if self.tensor is not None:
            K = self.tensor.values(env)
            out += 0.5 * float(p @ K @ p)
        return float(out)

    def momentum_gradient(self, point: PhasePoint) -> np.ndarray:
        env = _env_of(self.coords, point)
        p = np.asarray(point.p, dtype=float)
        out = np.zeros(len(self.coords))
        if self.tensor is not None:
            K = self.tensor.values(env)
            out += 0.5 * (K + K.T) @ p
        if self.linear is not None:
            out += np.array([_expr.evaluate(e, env) for e in self.linear])
        return out

    def position_gradient(self, point: PhasePoint) -> np.ndarray:
        env = _env_of(self.coords, point)
        p = np.asarray(point.p, dtype=float)
        out = np.zeros(len(self.coords))
        for k, name in enumerate(self.coords):
            acc = _expr.derivative(self.scalar, env, name)
            if self.linear is not None:
                acc += sum(_expr.derivative(e, env, name) * p[i]
                           for i, e in enumerate(self.linear))
            if self.tensor is not None:
                dK = self.tensor.derivative_values(env, name)
                acc += 0.5 * float(p @ dK @ p)
            out[k] = acc
        return out


def poisson_bracket(F: PhaseScalar, G: PhaseScalar,
                    point: PhasePoint) -> float:
    """{F, G} = sum_i dF/dq^i dG/dp_i - dF/dp_i dG/dq^i."""
    if F.coords != G.coords:
        raise GeometryError(
            "bracket arguments live on different phase spaces")
    if len(point.q) != len(F.coords):
        raise GeometryError(
            f"point has {len(point.q)} coordinates, expected "
            f"{len(F.coords)}")
    dqF = F.position_gradient(point)
    dpF = F.momentum_gradient(point)
    dqG = G.position_gradient(point)
    dpG = G.momentum_gradient(point)
    return float(dqF @ dpG - dpF @ dqG)


# ---------------------------------------------------------------------------
# connection and curvature

def _covariant_derivatives(g: MetricField, env):
    """gcov, first and second coordinate derivatives of gcov.

    Derivatives of the inverse come from the analytic identity
    d(g) = -g (dG) g applied to the contravariant components.
    """
    n = g.n
    G = g.contravariant(env)
    det = float(np.linalg.det(G))
    if det == 0.0 or not np.isfinite(det):
        raise DegenerateMetricError("metric degenerate at the given point")
    gcov = np.linalg.inv(G)
    dG = [g.derivative(env, c) for c in g.coords]
    dg = [-gcov @ dG[k] @ gcov for k in range(n)]
    d2g = np.empty((n, n, n, n))
    for m in range(n):
        for k in range(m + 1):
            d2G = g.second_derivative(env, g.coords[m], g.coords[k])
            val = -(dg[m] @ dG[k] @ gcov + gcov @ d2G @ gcov
                    + gcov @ dG[k] @ dg[m])
            d2g[m, k] = val
            d2g[k, m] = val
    return G, gcov, np.array(dG), np.array(dg), d2g


def christoffel(g: MetricField, point) -> np.ndarray:
    """Levi-Civita connection coefficients, out[i,j,k] = Gamma^i_jk."""
    env = _env_of(g.coords, point)
    G, _, _, dg, _ = _covariant_derivatives(g, env)
    # A[l,j,k] = d_j g_lk + d_k g_lj - d_l g_jk
    A = (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)
    return 0.5 * np.einsum("il,ljk->ijk", G, A)


def riemann(g: MetricField, point) -> np.ndarray:
    """Curvature of the Levi-Civita connection, out[i,j,k,l] = R^i_jkl."""
    env = _env_of(g.coords, point)
    n = g.n
    G, _, dG, dg, d2g = _covariant_derivatives(g, env)
    A = (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)
    Gamma = 0.5 * np.einsum("il,ljk->ijk", G, A)
    # dA[m,l,j,k] = d2_mj g_lk + d2_mk g_lj - d2_ml g_jk
    dA = (d2g.transpose(0, 2, 1, 3) + d2g.transpose(0, 2, 3, 1) - d2g)
    dGamma = 0.5 * (np.einsum("mil,ljk->mijk", dG, A)
                    + np.einsum("il,mljk->mijk", G, dA))
    R = (dGamma.transpose(1, 2, 0, 3) - dGamma.transpose(1, 2, 3, 0)
         + np.einsum("ikm,mjl->ijkl", Gamma, Gamma)
         - np.einsum("ilm,mjk->ijkl", Gamma, Gamma))
    return R


def ricci_scalar(g: MetricField, point) -> float:
    """Scalar curvature, the double trace of the curvature tensor."""
    env = _env_of(g.coords, point)
    R = riemann(g, env)
    ric = np.einsum("ijil->jl", R)
    return float(np.einsum("jl,jl->", g.contravariant(env), ric))


def killing_residual(g: MetricField, K: TensorField2, point) -> float:
    """max |nabla_(i K_jk)| of a covariant symmetric 2-tensor."""
    if K.variance != "covariant":
        raise VarianceError("killing_residual expects covariant components")
    env = _env_of(g.coords, point)
    n = g.n
    Gamma = christoffel(g, env)
    Kv = K.values(env)
    dK = np.array([K.derivative_values(env, c) for c in K.coords])
    # nabla[i,j,k] = d_i K_jk - Gamma^l_ij K_lk - Gamma^l_ik K_jl
    nabla = (dK - np.einsum("lij,lk->ijk", Gamma, Kv)
             - np.einsum("lik,jl->ijk", Gamma, Kv))
    sym = (nabla + nabla.transpose(1, 2, 0) + nabla.transpose(2, 0, 1)) / 3.0
    return float(np.max(np.abs(sym)))


# ---------------------------------------------------------------------------
# torsion, Haantjes condition, normality contractions

def _mixed_components(T: TensorField2, g: MetricField | None, env):
    """Mixed values T^i_j and their coordinate derivatives.

    Converts variance on the fly when a metric is available, using the
    analytic derivative of the inverse for the covariant metric factor.
    """
    coords = T.coords
    n = T.n
    Tv = T.values(env)
    dT = [T.derivative_values(env, c) for c in coords]
    if T.variance == "mixed":
        return Tv, dT
    metric = g or T.metric
    if metric is None:
        raise VarianceError(
            f"{T.variance} tensor needs a metric to be used as an "
            "endomorphism")
    G = metric.contravariant(env)
    gcov = np.linalg.inv(G)
    dG = [metric.derivative(env, c) for c in coords]
    dg = [-gcov @ dG[k] @ gcov for k in range(n)]
    if T.variance == "contravariant":
        mixed = Tv @ gcov
        dmixed = [dT[k] @ gcov + Tv @ dg[k] for k in range(n)]
    else:
        mixed = G @ Tv
        dmixed = [dG[k] @ Tv + G @ dT[k] for k in range(n)]
    return mixed, dmixed


def _torsion_from(Tv: np.ndarray, dT) -> np.ndarray:
    """N^i_jk of a mixed tensor from its values and derivatives.

    N^i_jk = (1/2)[T^i_l (d_k T^l_j - d_j T^l_k)
                   + T^l_j d_l T^i_k - T^l_k d_l T^i_j].
    """
    d = np.array(dT)  # d[k, i, j] = d_k T^i_j
    t1 = np.einsum("il,klj->ijk", Tv, d) - np.einsum("il,jlk->ijk", Tv, d)
    t2 = np.einsum("lj,lik->ijk", Tv, d) - np.einsum("lk,lij->ijk", Tv, d)
    return 0.5 * (t1 + t2)


def nijenhuis(T: TensorField2, point) -> np.ndarray:
    """Nijenhuis torsion of a mixed tensor field, out[i,j,k] = N^i_jk."""
    if T.variance != "mixed":
        raise VarianceError("nijenhuis expects mixed components")
    env = _env_of(T.coords, point)
    Tv = T.values(env)
    dT = [T.derivative_values(env, c) for c in T.coords]
    return _torsion_from(Tv, dT)


def eigenvalue_groups(values, scale: float = 1e-8):
    """Cluster eigenvalues by relative gap scale*(1 + |value|).

    Returns (groups, degenerate) where groups is a tuple of
    (representative, multiplicity) pairs and degenerate flags a
    clustering that changes when the tolerance is multiplied by 10.
    """
    vals = np.asarray(values)

    def split(tol):
        order = np.lexsort((vals.imag, vals.real)) if np.iscomplexobj(
            vals) else np.argsort(vals)
        groups = []
        for idx in order:
            v = vals[idx]
            if groups and abs(v - groups[-1][-1]) <= tol * (1 + abs(v)):
                groups[-1].append(v)
            else:
                groups.append([v])
        return groups

    base = split(scale)
    wide = split(scale * 10)
    degenerate = [len(grp) for grp in base] != [len(grp) for grp in wide]
    reps = tuple((complex(np.mean(grp)) if np.iscomplexobj(vals)
                  else float(np.mean(grp)), len(grp)) for grp in base)
    return reps, degenerate


def _rank_test(Tv: np.ndarray):
    """Check that each eigenvalue cluster has a full eigenspace.

    Kernel dimensions come from SVD with a relative cutoff of 1e-8;
    instability of the answer under a 10x larger cutoff is flagged.
    """
    eigvals = np.linalg.eigvals(Tv)
    groups, degenerate = eigenvalue_groups(eigvals)
    n = Tv.shape[0]

    def complete(cutoff_scale):
        for value, mult in groups:
            sv = np.linalg.svd(Tv - value * np.eye(n), compute_uv=False)
            top = max(float(sv[0]), 1.0)
            kernel = int(np.sum(sv <= cutoff_scale * top))
            if kernel != mult:
                return False
        return True

    ok = complete(1e-8)
    if ok != complete(1e-7):
        degenerate = True
    return ok, degenerate


def haantjes(T: TensorField2, point) -> dict:
    """Torsion-based integrability data of a mixed tensor field.

    Returns the doubled torsion H^i_jk = 2 N^i_jk, the max-norm of the
    full normal-eigenvector condition

      H^k_ns T^n_m T^s_l - (H^s_nl T^n_m - H^s_nm T^n_l) T^k_s
        + H^n_ml T^k_s T^s_n,

    and the numeric eigenspace completeness check with its stability
    flag.
    """
    if T.variance != "mixed":
        raise VarianceError("haantjes expects mixed components")
    env = _env_of(T.coords, point)
    Tv = T.values(env)
    dT = [T.derivative_values(env, c) for c in T.coords]
    H = 2.0 * _torsion_from(Tv, dT)
    t1 = np.einsum("kns,nm,sl->kml", H, Tv, Tv)
    t2 = (np.einsum("snl,nm,ks->kml", H, Tv, Tv)
          - np.einsum("snm,nl,ks->kml", H, Tv, Tv))
    t3 = np.einsum("nml,ks,sn->kml", H, Tv, Tv)
    cond = t1 - t2 + t3
    diagonalizable, degenerate = _rank_test(Tv)
    return {
        "tensor": H,
        "condition_residual": float(np.max(np.abs(cond))),
        "diagonalizable": diagonalizable,
        "degenerate_point": degenerate,
    }


def tsn_residuals(K: TensorField2, g: MetricField, point):
    """The three normality contractions of the torsion of K.

    Returns max-norms of N^l_[ij g_k]l, N^l_[ij K_k]l and
    N^l_[ij K_k]m K^m_l, with full antisymmetrization over (i,j,k).
    """
    env = _env_of(g.coords, point)
    Tv, dT = _mixed_components(K, g, env)
    N = _torsion_from(Tv, dT)
    gcov = g.covariant(env)
    Kcov = gcov @ Tv
    mats = (gcov, Kcov, Kcov @ Tv)

    out = []
    for Q in mats:
        # cyclic sum over an index pair already antisymmetric in (i,j)
        con = np.einsum("lij,kl->ijk", N, Q)
        res = (con + con.transpose(1, 2, 0) + con.transpose(2, 0, 1)) / 3.0
        out.append(float(np.max(np.abs(res))))
    return tuple(out)


# ---------------------------------------------------------------------------
# block eigenvalues and the separability residuals

def _system_sm(sys: TwistedSystem, point):
    env = _env_of(sys.structure.names, point)
    S = _model.matrix_values(sys.stackel.entries, env)
    M, _, _ = _model.invert_with_condition(
        S, point=[env[c] for c in sys.structure.names])
    return env, S, M


def block_eigenvalues(sys: TwistedSystem, a: int, point) -> np.ndarray:
    """Per-block eigenvalues of the a-th quadratic integral against the
    twisted metric: value r is (S^-1)[a][r] / alpha^r."""
    if not 1 <= a <= sys.n:
        raise _model.BlockIndexError(
            f"integral index {a} out of range 1..{sys.n}")
    env, _, M = _system_sm(sys, point)
    alpha = M[0]
    for r in range(sys.n):
        if alpha[r] == 0.0:
            raise VanishingTwistError(
                f"twist function for block {r + 1} vanishes at the "
                "given point")
    return M[a - 1] / alpha


def block_eisenhart_residual(sys: TwistedSystem, a: int, point) -> float:
    """max |d_k lambda^s - (lambda^r(k) - lambda^s) d_k ln|alpha^s||
    over coordinates k (in block r(k)) and blocks s."""
    if not 1 <= a <= sys.n:
        raise _model.BlockIndexError(
            f"integral index {a} out of range 1..{sys.n}")
    env, _, M = _system_sm(sys, point)
    alpha = M[0]
    for r in range(sys.n):
        if alpha[r] == 0.0:
            raise VanishingTwistError(
                f"twist function for block {r + 1} vanishes at the "
                "given point")
    lam = M[a - 1] / alpha
    worst = 0.0
    for k, name in enumerate(sys.structure.names):
        r = sys.structure.block_of(k) - 1
        dS = _model.matrix_derivative(sys.stackel.entries, env, name)
        dM = -M @ dS @ M
        for s in range(sys.n):
            dlam = (dM[a - 1, s] * alpha[s] - M[a - 1, s] * dM[0, s]) \
                / alpha[s] ** 2
            dln = dM[0, s] / alpha[s]
            worst = max(worst, abs(dlam - (lam[r] - lam[s]) * dln))
    return worst


def block_levi_civita_residual(sys: TwistedSystem, point) -> dict:
    """Cross-block integrability residuals of the twist functions.

    metric_residual: max over coordinate pairs (k in block r, l in
    block s, r != s) and targets m of
      alpha^r alpha^s d2_kl alpha^m - alpha^r d_k alpha^s d_l alpha^m
        - alpha^s d_l alpha^r d_k alpha^m.
    potential_residual: the same combination with alpha^m replaced by
    the assembled potential V = alpha^m V_m.
    """
    env, _, M = _system_sm(sys, point)
    alpha = M[0]
    n = sys.n
    names = sys.structure.names
    N = len(names)
    entries = sys.stackel.entries

    dS = [_model.matrix_derivative(entries, env, c) for c in names]
    dalpha = [-(alpha @ dS[k]) @ M for k in range(N)]

    V_m = np.array([_expr.evaluate(blk.potential, env)
                    for blk in sys.blocks])
    dV_m = np.array([[_expr.derivative(blk.potential, env, c)
                      for blk in sys.blocks] for c in names])
    dV = np.array([dalpha[k] @ V_m + alpha @ dV_m[k] for k in range(N)])

    metric_worst = 0.0
    potential_worst = 0.0
    for k in range(N):
        r = sys.structure.block_of(k) - 1
        for l in range(N):
            s = sys.structure.block_of(l) - 1
            if s == r:
                continue
            d2S = _model.matrix_second_derivative(entries, env, names[k],
                                                  names[l])
            d2alpha = alpha @ (dS[k] @ M @ dS[l] + dS[l] @ M @ dS[k]
                               - d2S) @ M
            for m in range(n):
                res = (alpha[r] * alpha[s] * d2alpha[m]
                       - alpha[r] * dalpha[k][s] * dalpha[l][m]
                       - alpha[s] * dalpha[l][r] * dalpha[k][m])
                metric_worst = max(metric_worst, abs(res))
            d2V_m = np.array([_expr.second_derivative(blk.potential, env,
                                                      names[k], names[l])
                              for blk in sys.blocks])
            d2V = (d2alpha @ V_m + dalpha[k] @ dV_m[l]
                   + dalpha[l] @ dV_m[k] + alpha @ d2V_m)
            res = (alpha[r] * alpha[s] * d2V
                   - alpha[r] * dalpha[k][s] * dV[l]
                   - alpha[s] * dalpha[l][r] * dV[k])
            potential_worst = max(potential_worst, abs(res))
    return {"metric_residual": metric_worst,
            "potential_residual": potential_worst}


def characteristic_condition(T: TensorField2, V, g: MetricField,
                             point) -> float:
    """max |d(T dV)|: closedness of the one-form (T dV)_j = T^k_j d_k V."""
    V = _model._as_expression(V)
    env = _env_of(g.coords, point)
    coords = g.coords
    n = len(coords)
    Tv, dT = _mixed_components(T, g, env)
    dV = np.array([_expr.derivative(V, env, c) for c in coords])
    d2V = np.empty((n, n))
    for i in range(n):
        for j in range(i + 1):
            d2V[i, j] = d2V[j, i] = _expr.second_derivative(
                V, env, coords[i], coords[j])
    # domega[i, j] = d_i (T dV)_j
    dTarr = np.array(dT)
    domega = (np.einsum("ikj,k->ij", dTarr, dV)
              + np.einsum("kj,ik->ij", Tv, d2V))
    return float(np.max(np.abs(domega - domega.T)))


# ---------------------------------------------------------------------------
# symbolic inverse rows and quadratic first integrals

def _minor(rows, i: int, j: int):
    return [[e for c, e in enumerate(row) if c != j]
            for r, row in enumerate(rows) if r != i]


def _det_expr(rows) -> Expression:
    n = len(rows)
    if n == 0:
        return _expr.Num(1.0)
    if n == 1:
        return rows[0][0]
    acc = None
    for j in range(n):
        term = rows[0][j] * _det_expr(_minor(rows, 0, j))
        if acc is None:
            acc = term
        elif j % 2 == 0:
            acc = acc + term
        else:
            acc = acc - term
    return acc


def determinant_expression(stackel: StackelMatrix) -> Expression:
    """The separation determinant as an expression, for AD probing."""
    return _det_expr([list(row) for row in stackel.entries])


def symbolic_inverse_row(stackel: StackelMatrix, a: int):
    """Row a (1-based) of the inverse separation matrix as expressions.

    Cofactor expansion; intended for the small matrices this package
    works with, where the expression trees stay manageable.
    """
    n = stackel.n
    if not 1 <= a <= n:
        raise _model.BlockIndexError(f"row index {a} out of range 1..{n}")
    entries = [list(row) for row in stackel.entries]
    det = _det_expr(entries)
    row = []
    for r in range(n):
        cof = _det_expr(_minor(entries, r, a - 1))
        if (r + a - 1) % 2 == 1:
            cof = -cof
        row.append(cof / det)
    return tuple(row)


def first_integral_scalar(sys: TwistedSystem, a: int) -> PhaseScalar:
    """The a-th quadratic integral as a phase-space scalar:
    (1/2) k_a^ij p_i p_j + W_a with k_a block-diagonal from the inverse
    separation row and W_a the same row applied to the potentials."""
    if not 1 <= a <= sys.n:
        raise _model.BlockIndexError(
            f"integral index {a} out of range 1..{sys.n}")
    row = symbolic_inverse_row(sys.stackel, a)
    names = sys.structure.names
    N = sys.dim
    grid = [[_expr.Num(0.0) for _ in range(N)] for _ in range(N)]
    for r in range(sys.n):
        idx = list(sys.structure.block_range(r + 1))
        blk = sys.blocks[r]
        for i, gi in enumerate(idx):
            for j, gj in enumerate(idx):
                if gj < gi:
                    grid[gi][gj] = grid[gj][gi]
                else:
                    grid[gi][gj] = row[r] * blk.metric[i][j]
    W = None
    for r in range(sys.n):
        term = row[r] * sys.blocks[r].potential
        W = term if W is None else W + term
    tensor = TensorField2(names, grid, "contravariant", symmetric=True)
    return PhaseScalar(names, tensor=tensor, scalar=W)


# ---------------------------------------------------------------------------
# seeded sampling with rejection

def rejection_sample(box, count: int, seed: int, predicate=None,
                     max_tries: int | None = None):
    """Sample ``count`` points uniformly from a coordinate box, keeping
    only those where ``predicate`` holds.  Deterministic for a seed."""
    rng = np.random.default_rng(seed)
    los = np.array([lo for lo, _ in box], dtype=float)
    his = np.array([hi for _, hi in box], dtype=float)
    limit = max_tries if max_tries is not None else 10000 * count
    out = []
    tries = 0
    while len(out) < count:
        if tries >= limit:
            raise GeometryError(
                f"rejection sampling exhausted {limit} tries with only "
                f"{len(out)} of {count} points accepted")
        tries += 1
        pt = tuple(rng.uniform(los, his))
        if predicate is None or predicate(pt):
            out.append(pt)
    return out
