"""Truncated bosonic Fock space over a discretized momentum shell.

The field lives on a finite set of modes obtained from a quadrature of the
shell sigma <= |k| <= kappa: geometric (or linear) radial cells crossed with a
symmetric angular rule. Each mode carries one canonical boson pair; all
continuum measure factors are pushed into the quadrature weights, so a smeared
field sum_m profile(k_m) sqrt(w_m) (b_m + b_m^dag) approximates the integral
int profile(k) (b(k) + b(k)^dag) d^3k.

States are occupation vectors with total occupation <= n_max, enumerated in
graded lexicographic order with the vacuum at index 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BudgetError, ConfigError, InvalidShellError

__all__ = [
    "ModeGrid",
    "FockBasis",
    "SparseOperator",
    "StateVector",
    "angular_rule",
    "build_grid",
    "concat_grids",
    "enumerate_basis",
    "ladder_ops",
    "composite_ops",
    "CompositeOps",
]

_BUDGET_DEFAULT = 2_000_000


def angular_rule(name: str):
    """Return (directions, weights) for a named unit-sphere quadrature.

    Weights sum to 4*pi. Available rules:

    - "single": one node at +z (only useful for isotropic integrands),
    - "axis2": antipodal pair along z,
    - "octahedral6": the six coordinate axes (exact through degree 3,
      and through degree 5 up to the anisotropic x^4 terms),
    - "gauss_NxM": Gauss-Legendre in cos(theta) times M midpoint azimuths.

    All rules except "single" are symmetric under k -> -k, which the
    dispersion checks at P = 0 rely on.
    """
    if name == "single":
        dirs = np.array([[0.0, 0.0, 1.0]])
        w = np.array([4.0 * np.pi])
    elif name == "axis2":
        dirs = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        w = np.array([2.0 * np.pi, 2.0 * np.pi])
    elif name == "octahedral6":
        dirs = np.array(
            [
                [1.0, 0, 0], [-1.0, 0, 0],
                [0, 1.0, 0], [0, -1.0, 0],
                [0, 0, 1.0], [0, 0, -1.0],
            ]
        )
        w = np.full(6, 4.0 * np.pi / 6.0)
    elif name.startswith("gauss_"):
        try:
            ns, ms = name[len("gauss_"):].split("x")
            n, m_phi = int(ns), int(ms)
        except ValueError as exc:
            raise ConfigError(f"cannot parse angular rule {name!r}") from exc
        if n < 1 or m_phi < 1:
            raise ConfigError(f"angular rule {name!r} needs positive counts")
        x, wx = np.polynomial.legendre.leggauss(n)
        phi = 2.0 * np.pi * (np.arange(m_phi) + 0.5) / m_phi
        ct = np.repeat(x, m_phi)
        st = np.sqrt(1.0 - ct**2)
        ph = np.tile(phi, n)
        dirs = np.column_stack([st * np.cos(ph), st * np.sin(ph), ct])
        w = np.repeat(wx, m_phi) * (2.0 * np.pi / m_phi)
    else:
        raise ConfigError(f"unknown angular rule {name!r}")
    return dirs, w


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """Discrete momentum modes: nodes k, quadrature weights w, shell bounds.

    Modes are sorted by (|k|, angular index): all directions of the softest
    radial cell first. r_edges holds the radial cell boundaries (one entry
    more than the number of radial cells); ang_dirs/ang_w the angular rule.
    """

    k: np.ndarray            # (n_modes, 3)
    w: np.ndarray            # (n_modes,)
    sigma: float
    kappa: float
    spacing: str
    angular: str
    r_edges: np.ndarray      # (n_radial + 1,)
    ang_dirs: np.ndarray     # (n_ang, 3)
    ang_w: np.ndarray        # (n_ang,)

    def __post_init__(self):
        if not (0.0 < self.sigma < self.kappa):
            raise InvalidShellError(
                f"need 0 < sigma < kappa, got sigma={self.sigma}, kappa={self.kappa}"
            )
        if np.any(self.w <= 0.0):
            raise ConfigError("grid weights must be positive")

    @property
    def n_modes(self) -> int:
        return self.k.shape[0]

    @property
    def n_radial(self) -> int:
        return len(self.r_edges) - 1

    @property
    def n_ang(self) -> int:
        return len(self.ang_w)

    @property
    def kabs(self) -> np.ndarray:
        return np.linalg.norm(self.k, axis=1)

    @property
    def khat(self) -> np.ndarray:
        return self.k / self.kabs[:, None]

    def moment_weights(self, radial_power: float) -> np.ndarray:
        """Per-mode weights integrating f(k) = |k|^q * a(khat) with the radial
        factor exact on each cell: w_q[m] = ang_w[a] * int_cell r^(q+2) dr.

        radial_power = 0 reproduces the plain cell-volume weights w.
        """
        lo, hi = self.r_edges[:-1], self.r_edges[1:]
        q = radial_power
        if abs(q + 3.0) < 1e-12:
            cell = np.log(hi / lo)
        else:
            cell = (hi ** (q + 3.0) - lo ** (q + 3.0)) / (q + 3.0)
        return np.outer(cell, self.ang_w).ravel()

    def window_mask(self, lo: float, hi: float | None = None) -> np.ndarray:
        """Boolean mask of modes whose nodes satisfy lo <= |k| <= hi."""
        if hi is None:
            hi = self.kappa
        r = self.kabs
        return (r >= lo) & (r <= hi)

    def subgrid(self, lo: float, hi: float | None = None) -> "ModeGrid":
        """Restriction to radial cells whose nodes lie in [lo, hi].

        Cell edges are kept for the surviving cells; the shell bounds shrink
        to the outermost surviving edges so weight bookkeeping stays exact.
        """
        if hi is None:
            hi = self.kappa
        nodes = 0.5 * (self.r_edges[:-1] + self.r_edges[1:])
        if self.spacing == "geometric":
            nodes = np.sqrt(self.r_edges[:-1] * self.r_edges[1:])
        keep = np.nonzero((nodes >= lo) & (nodes <= hi))[0]
        if len(keep) == 0:
            raise InvalidShellError(f"no radial cells left in [{lo}, {hi}]")
        if np.any(np.diff(keep) != 1):
            raise ConfigError("subgrid window must select contiguous cells")
        mask = np.zeros(self.n_modes, bool)
        for i in keep:
            mask[i * self.n_ang:(i + 1) * self.n_ang] = True
        edges = self.r_edges[keep[0]:keep[-1] + 2]
        return ModeGrid(
            k=self.k[mask], w=self.w[mask],
            sigma=float(edges[0]), kappa=float(edges[-1]),
            spacing=self.spacing, angular=self.angular,
            r_edges=edges, ang_dirs=self.ang_dirs, ang_w=self.ang_w,
        )


def build_grid(
    sigma: float,
    kappa: float,
    n_radial: int,
    angular: str = "octahedral6",
    spacing: str = "geometric",
) -> ModeGrid:
    """Quadrature grid for the shell sigma <= |k| <= kappa.

    Geometric spacing puts cell edges at sigma*(kappa/sigma)^(i/n) and nodes
    at the geometric cell midpoints sigma*(kappa/sigma)^((i+1/2)/n); linear
    spacing uses arithmetic midpoints. Weights are exact cell volumes
    (radial shell volume times angular weight), so sum(w) equals the shell
    volume (4*pi/3)(kappa^3 - sigma^3) up to roundoff.
    """
    if not (0.0 < sigma < kappa):
        raise InvalidShellError(
            f"need 0 < sigma < kappa, got sigma={sigma}, kappa={kappa}"
        )
    if n_radial < 1:
        raise ConfigError("n_radial must be at least 1")
    dirs, ang_w = angular_rule(angular)
    if spacing == "geometric":
        edges = sigma * (kappa / sigma) ** (np.arange(n_radial + 1) / n_radial)
        nodes = sigma * (kappa / sigma) ** ((np.arange(n_radial) + 0.5) / n_radial)
    elif spacing == "linear":
        edges = np.linspace(sigma, kappa, n_radial + 1)
        nodes = 0.5 * (edges[:-1] + edges[1:])
    else:
        raise ConfigError(f"unknown spacing {spacing!r}")
    # pin the endpoints exactly so window masks at sigma/kappa are reliable
    edges[0], edges[-1] = sigma, kappa
    vol = (edges[1:] ** 3 - edges[:-1] ** 3) / 3.0
    k = (nodes[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    w = np.outer(vol, ang_w).ravel()
    return ModeGrid(
        k=k, w=w, sigma=float(sigma), kappa=float(kappa),
        spacing=spacing, angular=angular,
        r_edges=edges, ang_dirs=dirs, ang_w=ang_w,
    )


def concat_grids(pieces) -> ModeGrid:
    """Merge radially contiguous grids (same angular rule) into one.

    Pieces must share spacing and angular rule and tile [min sigma, max kappa]
    without gaps; used to align cascade cutoffs with cell edges.
    """
    pieces = sorted(pieces, key=lambda g: g.sigma)
    first = pieces[0]
    edges = [first.r_edges]
    for prev, cur in zip(pieces, pieces[1:]):
        if cur.angular != first.angular or cur.spacing != first.spacing:
            raise ConfigError("cannot merge grids with different rules")
        if not math.isclose(prev.kappa, cur.sigma, rel_tol=1e-12):
            raise ConfigError(
                f"grid pieces do not tile: gap between {prev.kappa} and {cur.sigma}"
            )
        edges.append(cur.r_edges[1:])
    r_edges = np.concatenate(edges)
    return ModeGrid(
        k=np.vstack([g.k for g in pieces]),
        w=np.concatenate([g.w for g in pieces]),
        sigma=float(pieces[0].sigma), kappa=float(pieces[-1].kappa),
        spacing=first.spacing, angular=first.angular,
        r_edges=r_edges, ang_dirs=first.ang_dirs, ang_w=first.ang_w,
    )


def basis_dimension(n_modes: int, n_max: int) -> int:
    return math.comb(n_modes + n_max, n_max)


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation-number basis with total occupation <= n_max.

    states[i] is the i-th occupation vector in graded lexicographic order
    (grade = total occupation, ascending lex within a grade); the vacuum is
    index 0. index maps occupation bytes back to positions.
    """

    n_modes: int
    n_max: int
    states: np.ndarray                     # (dim, n_modes) uint8
    index: dict = field(repr=False)        # bytes -> int

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def index_of(self, occ) -> int:
        key = np.asarray(occ, dtype=np.uint8).tobytes()
        try:
            return self.index[key]
        except KeyError:
            raise KeyError(f"occupation {tuple(occ)} not in basis") from None

    def vacuum(self) -> "StateVector":
        amp = np.zeros(self.dim)
        amp[0] = 1.0
        return StateVector(amp)


def _compositions(total: int, parts: int):
    # ascending lexicographic compositions of `total` into `parts` slots
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def enumerate_basis(n_modes: int, n_max: int, budget: int = _BUDGET_DEFAULT) -> FockBasis:
    """Enumerate all occupation vectors with sum <= n_max in graded lex order.

    The dimension is C(n_modes + n_max, n_max); a BudgetError is raised before
    any allocation if it exceeds `budget`.
    """
    if n_modes < 1 or n_max < 0:
        raise ConfigError("need n_modes >= 1 and n_max >= 0")
    if n_max > 255:
        raise ConfigError("n_max beyond uint8 range is not supported")
    dim = basis_dimension(n_modes, n_max)
    if dim > budget:
        raise BudgetError(
            f"basis dimension {dim} exceeds budget {budget} "
            f"(n_modes={n_modes}, n_max={n_max})"
        )
    states = np.empty((dim, n_modes), dtype=np.uint8)
    i = 0
    for total in range(n_max + 1):
        for occ in _compositions(total, n_modes):
            states[i] = occ
            i += 1
    index = {states[j].tobytes(): j for j in range(dim)}
    return FockBasis(n_modes=n_modes, n_max=n_max, states=states, index=index)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense coefficient vector over a FockBasis ordering."""

    amplitudes: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.amplitudes.view(float))):
            raise ValueError("state amplitudes must be finite")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n)

    def dot(self, other: "StateVector") -> complex:
        """Inner product, conjugate-linear in self."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """CSR-backed operator with an explicit hermiticity flag.

    When hermitian=True the stored entries satisfy entry(c, r) =
    conj(entry(r, c)) exactly; assembly routines symmetrize before setting
    the flag, and is_hermitian_exact() verifies it entry by entry.
    """

    mat: sp.csr_matrix
    hermitian: bool = False

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def nnz(self) -> int:
        return self.mat.nnz

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.mat @ x

    def apply(self, state: StateVector) -> StateVector:
        return StateVector(self.mat @ state.amplitudes)

    def toarray(self) -> np.ndarray:
        return self.mat.toarray()

    def entries(self):
        """Iterate (row, col, value) over stored entries."""
        coo = self.mat.tocoo()
        yield from zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.mat.conjugate().T.tocsr(), hermitian=self.hermitian)

    def is_hermitian_exact(self) -> bool:
        d = self.mat - self.mat.conjugate().T.tocsr()
        return d.nnz == 0 or not np.any(d.data)

    def symmetrized(self) -> "SparseOperator":
        h = (self.mat + self.mat.conjugate().T.tocsr()) * 0.5
        return SparseOperator(h.tocsr(), hermitian=True)


def ladder_ops(basis: FockBasis, mode: int):
    """Annihilation and creation matrices for one mode.

    annihilation[s - e_m, s] = sqrt(n_m(s)); creation is its exact stored
    adjoint, so matrix elements that would leave the truncation are dropped.
    """
    if not (0 <= mode < basis.n_modes):
        raise ConfigError(f"mode {mode} outside 0..{basis.n_modes - 1}")
    occ = basis.states
    cols = np.nonzero(occ[:, mode])[0]
    vals = np.sqrt(occ[cols, mode].astype(float))
    lowered = occ[cols].copy()
    lowered[:, mode] -= 1
    rows = np.fromiter(
        (basis.index[r.tobytes()] for r in lowered), dtype=np.int64, count=len(cols)
    )
    b = sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))
    return SparseOperator(b), SparseOperator(b.conjugate().T.tocsr())


class CompositeOps:
    """Cached composite operators over one (grid, basis) pair.

    Exposes number_total, meson_momentum (3 diagonal components),
    meson_energy, and smeared_field(profile). Diagonal operators are built
    from occupation arithmetic; smeared fields reuse cached ladder matrices.
    """

    def __init__(self, grid: ModeGrid, basis: FockBasis):
        if grid.n_modes != basis.n_modes:
            raise ConfigError(
                f"grid has {grid.n_modes} modes but basis was built for {basis.n_modes}"
            )
        self.grid = grid
        self.basis = basis
        self._ladders = None

    def _diag(self, values: np.ndarray) -> SparseOperator:
        return SparseOperator(
            sp.diags(values, format="csr"), hermitian=bool(np.isrealobj(values))
        )

    @property
    def number_total(self) -> SparseOperator:
        return self._diag(self.basis.totals.astype(float))

    @property
    def meson_momentum(self):
        mom = self.basis.states.astype(float) @ self.grid.k  # (dim, 3)
        return tuple(self._diag(mom[:, i]) for i in range(3))

    @property
    def meson_energy(self) -> SparseOperator:
        return self._diag(self.basis.states.astype(float) @ self.grid.kabs)

    def ladders(self):
        if self._ladders is None:
            self._ladders = [ladder_ops(self.basis, m) for m in range(self.basis.n_modes)]
        return self._ladders

    def field_from_amplitudes(self, amp: np.ndarray) -> SparseOperator:
        """sum_m amp_m (b_m + b_m^dag) for a per-mode amplitude vector."""
        amp = np.asarray(amp)
        acc = None
        for m in np.nonzero(amp)[0]:
            b, bd = self.ladders()[m]
            term = amp[m] * (b.mat + bd.mat)
            acc = term if acc is None else acc + term
        if acc is None:
            acc = sp.csr_matrix((self.basis.dim, self.basis.dim))
        return SparseOperator(acc.tocsr(), hermitian=bool(np.isrealobj(amp)))

    def smeared_field(self, profile) -> SparseOperator:
        """sum_m profile(k_m) sqrt(w_m) (b_m + b_m^dag).

        profile takes a 3-vector k and returns a scalar; the result is
        hermitian exactly when the sampled profile values are real.
        """
        vals = np.asarray([profile(k) for k in self.grid.k])
        if np.isrealobj(vals) or not np.any(vals.imag):
            vals = vals.real
        return self.field_from_amplitudes(vals * np.sqrt(self.grid.w))


def composite_ops(grid: ModeGrid, basis: FockBasis) -> CompositeOps:
    return CompositeOps(grid, basis)


def expectation(op: SparseOperator, state: StateVector, normalize: bool = True):
    """<state|op|state>, divided by <state|state> unless normalize=False.

    Returns a real number when the operator is flagged hermitian.
    """
    s = state.amplitudes
    val = np.vdot(s, op.mat @ s)
    if normalize:
        val /= np.vdot(s, s).real
    return float(val.real) if op.hermitian else complex(val)
