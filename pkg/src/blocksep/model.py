"""Block structures, separation matrices, and twisted Hamiltonians.

A system is assembled from n coordinate blocks.  Block r carries a
natural Hamiltonian H_r = (1/2) g_r^{ij} p_i p_j + V_r whose metric and
potential depend only on block-r coordinates, and an n-by-n separation
matrix S whose row r likewise depends only on block-r coordinates.  The
first row alpha of S^{-1} supplies the twist functions that couple the
blocks into the single Hamiltonian

    H = sum_r alpha^r(q) H_r ,

and the remaining rows of S^{-1} give the companion first integrals
K_a.  Everything downstream (reduced dynamics, clocks, eigenvalue and
curvature residuals) is built from the values and the first two
derivatives of S^{-1}, which are computed analytically from dual-number
derivatives of S via d(S^{-1}) = -S^{-1} (dS) S^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import expr as _expr
from .expr import Expression


# ---------------------------------------------------------------------------
# errors

class ModelError(Exception):
    """Base class for system-construction and evaluation failures."""


class DimensionMismatchError(ModelError):
    pass


class ForeignVariableError(ModelError):
    """An entry mentions a coordinate outside its own block."""

    def __init__(self, entry: str, variable: str, block: int):
        self.entry = entry
        self.variable = variable
        self.block = block
        super().__init__(
            f"{entry} mentions '{variable}', which is not a block-{block} "
            f"coordinate (each row/block may only use its own coordinates)")


class SingularMatrixError(ModelError):
    """Separation matrix singular or numerically unusable at a point."""

    def __init__(self, message: str, cond: float | None = None,
                 point=None):
        self.cond = cond
        self.point = point
        if point is not None:
            message += f" at q={tuple(point)}"
        if cond is not None:
            message += f" (1-norm condition estimate {cond:.3e})"
        super().__init__(message)


class BlockIndexError(ModelError):
    pass


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class BlockStructure:
    """Partition of N coordinates into n named blocks."""

    sizes: tuple[int, ...]
    coords: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        coords = tuple(tuple(c) for c in self.coords)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "coords", coords)
        if len(sizes) == 0:
            raise DimensionMismatchError("at least one block is required")
        if any(s <= 0 for s in sizes):
            raise DimensionMismatchError("block sizes must be positive")
        if len(coords) != len(sizes):
            raise DimensionMismatchError(
                f"{len(sizes)} block sizes but {len(coords)} coordinate groups")
        for r, (s, names) in enumerate(zip(sizes, coords), start=1):
            if len(names) != s:
                raise DimensionMismatchError(
                    f"block {r} declares size {s} but {len(names)} names")
        flat = [name for group in coords for name in group]
        if len(set(flat)) != len(flat):
            raise DimensionMismatchError("coordinate names must be unique")

    @property
    def n(self) -> int:
        """Number of blocks."""
        return len(self.sizes)

    @property
    def total(self) -> int:
        """Total configuration dimension N."""
        return sum(self.sizes)

    @property
    def names(self) -> tuple[str, ...]:
        """All coordinate names, block by block."""
        return tuple(name for group in self.coords for name in group)

    def block_range(self, r: int) -> range:
        """Global index range of block r (1-based r)."""
        if not 1 <= r <= self.n:
            raise BlockIndexError(f"block index {r} out of range 1..{self.n}")
        start = sum(self.sizes[: r - 1])
        return range(start, start + self.sizes[r - 1])

    def block_of(self, k: int) -> int:
        """1-based block index owning global coordinate k (0-based k)."""
        if not 0 <= k < self.total:
            raise BlockIndexError(f"coordinate index {k} out of range")
        acc = 0
        for r, s in enumerate(self.sizes, start=1):
            acc += s
            if k < acc:
                return r
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class StackelMatrix:
    """n-by-n grid of expressions; entries[r][a] is the row-r, column-a
    entry, with row r allowed to depend only on block-r coordinates."""

    entries: tuple[tuple[Expression, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_expression(e) for e in row)
                     for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        for r, row in enumerate(rows, start=1):
            if len(row) != n:
                raise DimensionMismatchError(
                    f"separation matrix row {r} has {len(row)} entries, "
                    f"expected {n}")

    @property
    def n(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class NaturalBlock:
    """One block's natural Hamiltonian: contravariant metric grid plus
    potential, all in the block's own coordinates."""

    metric: tuple[tuple[Expression, ...], ...]
    potential: Expression

    def __post_init__(self):
        grid = tuple(tuple(_as_expression(e) for e in row)
                     for row in self.metric)
        object.__setattr__(self, "metric", grid)
        object.__setattr__(self, "potential", _as_expression(self.potential))
        m = len(grid)
        for i, row in enumerate(grid):
            if len(row) != m:
                raise DimensionMismatchError(
                    f"metric grid row {i + 1} has {len(row)} entries, "
                    f"expected {m}")
        for i in range(m):
            for j in range(i + 1, m):
                if grid[i][j] != grid[j][i]:
                    raise DimensionMismatchError(
                        f"metric grid not symmetric at ({i + 1},{j + 1})")

    @property
    def dim(self) -> int:
        return len(self.metric)


@dataclass(frozen=True)
class PhasePoint:
    """Positions and conjugate momenta, ordered like the structure."""

    q: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if len(self.q) != len(self.p):
            raise DimensionMismatchError(
                f"{len(self.q)} positions vs {len(self.p)} momenta")

    @classmethod
    def from_array(cls, y: Sequence[float]) -> "PhasePoint":
        y = list(y)
        half = len(y) // 2
        return cls(tuple(y[:half]), tuple(y[half:]))

    def as_array(self) -> np.ndarray:
        return np.array(self.q + self.p, dtype=float)


@dataclass(frozen=True)
class ProbePlan:
    """Validation points: user-declared points plus uniform samples in a
    coordinate box (fixed seed for reproducibility)."""

    points: tuple[Mapping[str, float], ...] = ()
    box: Mapping[str, tuple[float, float]] | None = None
    samples: int = 20
    seed: int = 42


@dataclass(frozen=True)
class TwistRows:
    """S^{-1} at a point.  Row a-1 holds the coefficients combining the
    block energies into K_a (row 0 is the twist vector alpha)."""

    matrix: np.ndarray
    cond: float
    warning: str | None = None

    def __getitem__(self, idx):
        return self.matrix[idx]


@dataclass(frozen=True)
class TwistedSystem:
    structure: BlockStructure
    stackel: StackelMatrix
    blocks: tuple[NaturalBlock, ...]
    probes: tuple[Mapping[str, float], ...] = ()

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def dim(self) -> int:
        return self.structure.total

    def env(self, q: Sequence[float]) -> dict:
        names = self.structure.names
        if len(q) != len(names):
            raise DimensionMismatchError(
                f"{len(q)} coordinates for {len(names)} names")
        return dict(zip(names, (float(x) for x in q)))


def _as_expression(e) -> Expression:
    if isinstance(e, Expression):
        return e
    if isinstance(e, str):
        return _expr.parse(e)
    if isinstance(e, (int, float)):
        return _expr.Num(float(e))
    raise TypeError(f"not an expression: {e!r}")


def _q_of(point) -> tuple[float, ...]:
    if isinstance(point, PhasePoint):
        return point.q
    return tuple(float(x) for x in point)


# ---------------------------------------------------------------------------
# numeric matrix helpers (shared with the geometry module)

COND_ERROR = 1e12
COND_WARN = 1e8


def matrix_values(grid, env) -> np.ndarray:
    """Evaluate a grid of expressions into a float matrix."""
    return np.array([[_expr.evaluate(e, env) for e in row] for row in grid],
                    dtype=float)


def matrix_derivative(grid, env, v: str) -> np.ndarray:
    """Entrywise exact partial derivative of a grid."""
    return np.array(
        [[_expr.derivative(e, env, v) for e in row] for row in grid],
        dtype=float)


def matrix_second_derivative(grid, env, v1: str, v2: str) -> np.ndarray:
    return np.array(
        [[_expr.second_derivative(e, env, v1, v2) for e in row]
         for row in grid], dtype=float)


def inverse_derivative(M: np.ndarray, dS: np.ndarray) -> np.ndarray:
    """d(S^{-1}) from M = S^{-1} and dS, via -M (dS) M."""
    return -M @ dS @ M


def inverse_second_derivative(M: np.ndarray, dS1: np.ndarray,
                              dS2: np.ndarray, d2S: np.ndarray) -> np.ndarray:
    """Second partial of S^{-1}: differentiate -M (dS1) M once more."""
    return M @ (dS1 @ M @ dS2 + dS2 @ M @ dS1 - d2S) @ M


def invert_with_condition(S: np.ndarray, point=None):
    """LU inverse with a 1-norm condition estimate.

    Returns (M, cond, warning).  cond above COND_ERROR raises; above
    COND_WARN the warning string is returned for attachment to results.
    """
    try:
        M = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("matrix is singular", point=point) from None
    if not np.all(np.isfinite(M)):
        raise SingularMatrixError("matrix inverse overflowed", point=point)
    norm1 = float(np.max(np.sum(np.abs(S), axis=0)))
    norm1_inv = float(np.max(np.sum(np.abs(M), axis=0)))
    cond = norm1 * norm1_inv
    if cond > COND_ERROR:
        raise SingularMatrixError("matrix numerically singular",
                                  cond=cond, point=point)
    warning = None
    if cond > COND_WARN:
        warning = (f"ill-conditioned separation matrix: 1-norm condition "
                   f"estimate {cond:.3e} exceeds {COND_WARN:.0e}")
    return M, cond, warning


# ---------------------------------------------------------------------------
# construction

def build_system(structure: BlockStructure, stackel: StackelMatrix,
                 blocks: Sequence[NaturalBlock],
                 probes: ProbePlan | None = None) -> TwistedSystem:
    """Validate and assemble a twisted system.

    Rejects dimensional mismatches, any row-r separation entry or
    block-r metric/potential mentioning a foreign coordinate, and a
    separation matrix singular at any probe point.
    """
    blocks = tuple(blocks)
    n = structure.n
    if stackel.n != n:
        raise DimensionMismatchError(
            f"separation matrix is {stackel.n}x{stackel.n} for {n} blocks")
    if len(blocks) != n:
        raise DimensionMismatchError(f"{len(blocks)} blocks for {n} declared")
    for r, (blk, size) in enumerate(zip(blocks, structure.sizes), start=1):
        if blk.dim != size:
            raise DimensionMismatchError(
                f"block {r} metric is {blk.dim}x{blk.dim}, expected "
                f"{size}x{size}")

    # structural foreign-variable validation
    for r in range(1, n + 1):
        own = frozenset(structure.coords[r - 1])
        for a in range(1, n + 1):
            entry = stackel.entries[r - 1][a - 1]
            for name in sorted(entry.free_variables() - own):
                raise ForeignVariableError(
                    f"separation matrix entry S[{r}][{a}]", name, r)
        blk = blocks[r - 1]
        for i, row in enumerate(blk.metric, start=1):
            for j, e in enumerate(row, start=1):
                for name in sorted(e.free_variables() - own):
                    raise ForeignVariableError(
                        f"block {r} metric entry g[{i}][{j}]", name, r)
        for name in sorted(blk.potential.free_variables() - own):
            raise ForeignVariableError(f"block {r} potential", name, r)

    probe_envs = _materialize_probes(structure, probes)

    sys = TwistedSystem(structure, stackel, blocks, probe_envs)

    # numeric validation at every probe point
    for env in probe_envs:
        S = matrix_values(stackel.entries, env)
        det = float(np.linalg.det(S))
        if det == 0.0 or not np.isfinite(det):
            raise SingularMatrixError(
                "separation matrix singular at probe point",
                point=[env[c] for c in structure.names])
        invert_with_condition(S, point=[env[c] for c in structure.names])
        for r, blk in enumerate(blocks, start=1):
            g = matrix_values(blk.metric, env)
            gdet = float(np.linalg.det(g))
            if gdet == 0.0 or not np.isfinite(gdet):
                raise SingularMatrixError(
                    f"block {r} metric degenerate at probe point",
                    point=[env[c] for c in structure.names])
    return sys


def _materialize_probes(structure: BlockStructure,
                        probes: ProbePlan | None):
    if probes is None:
        return ()
    names = structure.names
    out = []
    for pt in probes.points:
        missing = [c for c in names if c not in pt]
        if missing:
            raise DimensionMismatchError(
                f"probe point missing coordinates {missing}")
        out.append({c: float(pt[c]) for c in names})
    if probes.box is not None:
        missing = [c for c in names if c not in probes.box]
        if missing:
            raise DimensionMismatchError(
                f"probe box missing coordinates {missing}")
        rng = np.random.default_rng(probes.seed)
        for _ in range(probes.samples):
            env = {}
            for c in names:
                lo, hi = probes.box[c]
                env[c] = float(rng.uniform(lo, hi))
            out.append(env)
    return tuple(out)


# ---------------------------------------------------------------------------
# evaluation

def twist_rows(sys: TwistedSystem, point) -> TwistRows:
    """S^{-1} at the point, with the condition estimate attached."""
    env = sys.env(_q_of(point))
    S = matrix_values(sys.stackel.entries, env)
    M, cond, warning = invert_with_condition(
        S, point=[env[c] for c in sys.structure.names])
    return TwistRows(M, cond, warning)


def block_energy(sys: TwistedSystem, r: int, point: PhasePoint) -> float:
    """H_r = (1/2) g_r^{ij} p_i p_j + V_r on the block-r slice."""
    if not 1 <= r <= sys.n:
        raise BlockIndexError(f"block index {r} out of range 1..{sys.n}")
    env = sys.env(point.q)
    blk = sys.blocks[r - 1]
    idx = sys.structure.block_range(r)
    p = point.p
    kinetic = 0.0
    for i, gi in enumerate(idx):
        for j, gj in enumerate(idx):
            gij = _expr.evaluate(blk.metric[i][j], env)
            kinetic += gij * p[gi] * p[gj]
    return 0.5 * kinetic + _expr.evaluate(blk.potential, env)


def _block_energies(sys: TwistedSystem, point: PhasePoint) -> np.ndarray:
    return np.array([block_energy(sys, r, point)
                     for r in range(1, sys.n + 1)], dtype=float)


def hamiltonian(sys: TwistedSystem, point: PhasePoint) -> float:
    """H = sum_r alpha^r(q) H_r."""
    tw = twist_rows(sys, point)
    return float(tw.matrix[0] @ _block_energies(sys, point))


def first_integral(sys: TwistedSystem, a: int, point: PhasePoint) -> float:
    """K_a = sum_r (S^{-1})[a][r] H_r;  K_1 is H itself."""
    if not 1 <= a <= sys.n:
        raise BlockIndexError(
            f"first-integral index {a} out of range 1..{sys.n}")
    tw = twist_rows(sys, point)
    return float(tw.matrix[a - 1] @ _block_energies(sys, point))


def separation_constants(sys: TwistedSystem, point: PhasePoint) -> np.ndarray:
    """c_a = K_a(point); c_1 = H(point)."""
    tw = twist_rows(sys, point)
    return tw.matrix @ _block_energies(sys, point)


def reduced_hamiltonian(sys: TwistedSystem, r: int, c: Sequence[float],
                        point: PhasePoint) -> float:
    """H_r - sum_a c_a S[r][a]: the block-r separated-equation residual
    turned into a one-block Hamiltonian on the block slice."""
    if not 1 <= r <= sys.n:
        raise BlockIndexError(f"block index {r} out of range 1..{sys.n}")
    c = np.asarray(c, dtype=float)
    if c.shape != (sys.n,):
        raise DimensionMismatchError(
            f"expected {sys.n} separation constants, got shape {c.shape}")
    env = sys.env(point.q)
    srow = np.array([_expr.evaluate(e, env)
                     for e in sys.stackel.entries[r - 1]])
    return block_energy(sys, r, point) - float(c @ srow)
