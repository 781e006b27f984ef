"""Fiber Hamiltonians at fixed total momentum and their coherent dressing.

The fiber operator on the truncated Fock space is

    H = |P - P_mes|^2 / (2m) + sum_m |k_m| n_m + sum_m c_m (b_m + b_m^dag)

with mode couplings c_m = g sqrt(w_m) / sqrt(2 |k_m|) restricted to the
interaction window sigma <= |k| <= kappa. Dressing uses the Weyl generator
A = sum_m f_m (b_m - b_m^dag) with f_m = c_m / (|k_m| (1 - khat_m . v)); the
dressed operator in canonical form has no linear field term when v equals the
ground-state velocity, a diagonal one-boson energy |k| - k.v, and the additive
constant ground_constant().
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import (
    ConfigError,
    TruncationError,
    VelocityDomainError,
    WindowError,
)
from .fock import (
    CompositeOps,
    FockBasis,
    ModeGrid,
    SparseOperator,
    StateVector,
    composite_ops,
    ladder_ops,
)

__all__ = [
    "PhysParams",
    "DressingSpec",
    "WeylResult",
    "make_dressing",
    "assemble_fiber_hamiltonian",
    "ground_constant",
    "ground_constant_discrete",
    "dressing_generator",
    "apply_weyl",
    "pi_operators",
    "assemble_dressed_hamiltonian",
]

# strict regime thresholds; the desk-scale default only warns about them
_MASS_FLOOR_STRICT = 25.0 * 4.0**20
_EPS_CEIL_STRICT = 0.25**16


@dataclass(frozen=True)
class PhysParams:
    """Model parameters: coupling g, impurity mass m, UV cutoff kappa,
    total momentum P, cascade base eps, and secondary cutoff kappa1.

    The analysis regime (2 pi g^2 kappa <= 1/4, m > 25*4^20, eps < (1/4)^16,
    |P| <= sqrt(m)) is enforced only with strict_regime=True; by default the
    constraints relax to m > 0 and 0 < eps < 1/4 and a warning is emitted
    when a strict bound is violated.
    """

    g: float
    m: float
    kappa: float
    P: np.ndarray
    eps: float = 0.1
    kappa1: float | None = None
    strict_regime: bool = False

    def __post_init__(self):
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float).reshape(3))
        if self.kappa1 is None:
            object.__setattr__(self, "kappa1", 0.1 * self.kappa)
        if self.g < 0.0:
            raise ConfigError("coupling g must be non-negative")
        if self.m <= 0.0 or self.kappa <= 0.0:
            raise ConfigError("mass and cutoff must be positive")
        if not (0.0 < self.kappa1 <= self.kappa):
            raise ConfigError("need 0 < kappa1 <= kappa")
        if not (0.0 < self.eps < 0.25):
            raise ConfigError("cascade base eps must satisfy 0 < eps < 1/4")
        violations = []
        if 2.0 * np.pi * self.g**2 * self.kappa > 0.25:
            violations.append("2*pi*g^2*kappa <= 1/4")
        if self.m <= _MASS_FLOOR_STRICT:
            violations.append("m > 25*4^20")
        if self.eps >= _EPS_CEIL_STRICT:
            violations.append("eps < (1/4)^16")
        if np.linalg.norm(self.P) > np.sqrt(self.m):
            violations.append("|P| <= sqrt(m)")
        if violations:
            msg = "outside strict analysis regime: " + ", ".join(violations)
            if self.strict_regime:
                raise ConfigError(msg)
            warnings.warn(msg, stacklevel=2)

    def with_momentum(self, P) -> "PhysParams":
        return replace(self, P=np.asarray(P, dtype=float))


def _check_velocity(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    if np.linalg.norm(v) >= 1.0:
        raise VelocityDomainError(f"|v| = {np.linalg.norm(v)} is not < 1")
    return v


def _check_window(grid: ModeGrid, sigma: float, hi: float | None = None) -> float:
    lo_ok = sigma >= grid.sigma * (1.0 - 1e-12)
    hi = grid.kappa if hi is None else hi
    if not (lo_ok and sigma < hi and hi <= grid.kappa * (1.0 + 1e-12)):
        raise WindowError(
            f"window [{sigma}, {hi}] does not fit in shell "
            f"[{grid.sigma}, {grid.kappa}]"
        )
    return sigma


def mode_couplings(params: PhysParams, grid: ModeGrid, sigma: float,
                   hi: float | None = None) -> np.ndarray:
    """Per-mode field couplings c_m = g sqrt(w_m)/sqrt(2 |k_m|), zero outside
    the interaction window [sigma, hi]."""
    _check_window(grid, sigma, hi)
    amp = params.g * np.sqrt(grid.w / (2.0 * grid.kabs))
    return np.where(grid.window_mask(sigma, hi), amp, 0.0)


@dataclass(frozen=True, eq=False)
class DressingSpec:
    """Coherent dressing data: velocity v, window (lo, hi), amplitudes f_m.

    f_m = g sqrt(w_m) / (sqrt(2) |k_m|^{3/2} (1 - khat_m . v)) inside the
    window and zero outside. Amplitudes are real and finite for |v| < 1.
    """

    v: np.ndarray
    window: tuple
    f: np.ndarray

    def __post_init__(self):
        if np.any(~np.isfinite(self.f)):
            raise ConfigError("dressing amplitudes must be finite")


def make_dressing(params: PhysParams, grid: ModeGrid, v,
                  window: tuple | None = None) -> DressingSpec:
    v = _check_velocity(v)
    lo, hi = window if window is not None else (grid.sigma, grid.kappa)
    _check_window(grid, lo, hi)
    denom = grid.kabs * (1.0 - grid.khat @ v)
    f = mode_couplings(params, grid, lo, hi) / denom
    return DressingSpec(v=v, window=(float(lo), float(hi)), f=f)


def assemble_fiber_hamiltonian(
    params: PhysParams,
    grid: ModeGrid,
    basis: FockBasis,
    sigma: float | None = None,
    include_recoil: bool = True,
    ops: CompositeOps | None = None,
) -> SparseOperator:
    """Sparse fiber Hamiltonian with the interaction cut below `sigma`.

    sigma defaults to the grid's infrared edge (full interaction window).
    include_recoil=False drops the |P - P_mes|^2/(2m) term, leaving
    independent displaced modes; useful as an exactly solvable reference.
    """
    if sigma is None:
        sigma = grid.sigma
    ops = ops if ops is not None else composite_ops(grid, basis)
    occ = basis.states.astype(float)
    diag = occ @ grid.kabs
    if include_recoil:
        rel = params.P[None, :] - occ @ grid.k
        diag = diag + np.einsum("ij,ij->i", rel, rel) / (2.0 * params.m)
    field = ops.field_from_amplitudes(mode_couplings(params, grid, sigma))
    h = sp.diags(diag, format="csr") + field.mat
    return SparseOperator(h.tocsr(), hermitian=True)


def ground_constant(params: PhysParams, grid: ModeGrid, sigma: float, v) -> float:
    """Additive constant of the canonical dressed form,

        c = P^2/(2m) - g^2 int_{sigma<=|k|<=kappa} d^3k / (2|k|^2 (1-khat.v)).

    The radial integral is elementary ((kappa - sigma)/2) and is taken in
    closed form; the direction average uses the grid's angular rule. At
    v = 0 every rule integrates the constant 1 exactly, giving
    P^2/(2m) - 2 pi g^2 (kappa - sigma) to machine precision.
    """
    v = _check_velocity(v)
    _check_window(grid, sigma)
    ang = float(np.sum(grid.ang_w / (1.0 - grid.ang_dirs @ v)))
    radial = 0.5 * (grid.kappa - sigma)
    P2 = float(params.P @ params.P)
    return P2 / (2.0 * params.m) - params.g**2 * radial * ang


def ground_constant_discrete(params: PhysParams, grid: ModeGrid,
                             sigma: float, v) -> float:
    """Same constant evaluated on the grid's discrete measure,

        P^2/(2m) - sum_m w_m g^2 / (2 |k_m|^2 (1 - khat_m . v)),

    i.e. with the integral replaced by the mode sum. This is the constant
    produced by exact Weyl conjugation of the discretized fiber operator;
    it converges to ground_constant() as the radial resolution grows.
    """
    v = _check_velocity(v)
    mask = grid.window_mask(_check_window(grid, sigma))
    term = grid.w / (2.0 * grid.kabs**2 * (1.0 - grid.khat @ v))
    P2 = float(params.P @ params.P)
    return P2 / (2.0 * params.m) - params.g**2 * float(term[mask].sum())


def dressing_generator(spec: DressingSpec, grid: ModeGrid,
                       basis: FockBasis) -> SparseOperator:
    """Skew-hermitian Weyl generator A = sum_m f_m (b_m - b_m^dag)."""
    if grid.n_modes != basis.n_modes or len(spec.f) != grid.n_modes:
        raise ConfigError("dressing, grid and basis mode counts disagree")
    acc = sp.csr_matrix((basis.dim, basis.dim))
    for m in np.nonzero(spec.f)[0]:
        ann, cre = ladder_ops(basis, int(m))
        acc = acc + spec.f[m] * (ann.mat - cre.mat)
    return SparseOperator(acc.tocsr(), hermitian=False)


class WeylResult(NamedTuple):
    state: StateVector
    norm_drift: float
    terms: int


def apply_weyl(generator: SparseOperator, state: StateVector,
               order: int = 64, tol: float = 1e-15) -> WeylResult:
    """Apply exp(-A) by its power series, term by term.

    Stops early once a term norm falls below tol relative to the partial sum.
    Because A is skew-hermitian the limit is unitary; norm_drift reports the
    leftover |norm(out) - norm(in)| from series truncation. Raises
    TruncationError if term norms fail to decrease for three consecutive
    orders past order/2 (the series is then outside its useful domain).
    """
    a = generator.mat
    term = state.amplitudes.astype(complex if np.iscomplexobj(a.data) or
                                   np.iscomplexobj(state.amplitudes) else float)
    acc = term.copy()
    grow_streak = 0
    prev_term_norm = np.linalg.norm(term)
    n_used = 0
    for n in range(1, order + 1):
        term = -(a @ term) / n
        acc += term
        n_used = n
        tnorm = np.linalg.norm(term)
        if tnorm <= tol * np.linalg.norm(acc):
            break
        if n > max(4, order // 2):
            grow_streak = grow_streak + 1 if tnorm >= prev_term_norm else 0
            if grow_streak >= 3:
                raise TruncationError(
                    f"exp series terms not decreasing at order {n} "
                    f"(|term| = {tnorm:.3e}); increase order or shrink f"
                )
        prev_term_norm = tnorm
    out = acc if np.iscomplexobj(state.amplitudes) else np.real_if_close(acc, tol=100)
    drift = abs(np.linalg.norm(acc) - np.linalg.norm(state.amplitudes))
    return WeylResult(StateVector(np.asarray(out)), float(drift), n_used)


def pi_operators(params: PhysParams, grid: ModeGrid, basis: FockBasis,
                 spec: DressingSpec, ops: CompositeOps | None = None):
    """Dressed momentum components Pi_i = P_mes_i - sum_m k_mi f_m (b+b^dag)."""
    ops = ops if ops is not None else composite_ops(grid, basis)
    mom = ops.meson_momentum
    out = []
    for i in range(3):
        fld = ops.field_from_amplitudes(grid.k[:, i] * spec.f)
        out.append(SparseOperator((mom[i].mat - fld.mat).tocsr(), hermitian=True))
    return tuple(out)


def assemble_dressed_hamiltonian(
    params: PhysParams,
    grid: ModeGrid,
    basis: FockBasis,
    sigma: float,
    v,
    mean_pi,
    ops: CompositeOps | None = None,
) -> SparseOperator:
    """Canonical dressed Hamiltonian, assembled directly (not by conjugation):

        H_w = sum_i (Pi_i - mean_pi_i)^2 / (2m)
              + sum_m (|k_m| - k_m . v) n_m + ground_constant(...).

    mean_pi is caller-supplied (normally the expectation of Pi on the dressed
    ground state). With v the ground-state velocity and mean_pi = <Pi>, this
    matches the Weyl conjugation of the fiber operator up to the additive
    offset |P - m v|^2/(2m) (zero at P = 0 and fourth order in g otherwise).
    The constant uses the discrete measure (ground_constant_discrete), which
    is what exact conjugation of the discretized operator yields.
    """
    v = _check_velocity(v)
    mean_pi = np.asarray(mean_pi, dtype=float).reshape(3)
    ops = ops if ops is not None else composite_ops(grid, basis)
    spec = make_dressing(params, grid, v, window=(sigma, grid.kappa))
    pi = pi_operators(params, grid, basis, spec, ops=ops)
    occ = basis.states.astype(float)
    diag = occ @ (grid.kabs - grid.k @ v)
    h = sp.diags(diag, format="csr")
    eye = sp.identity(basis.dim, format="csr")
    for i in range(3):
        m_i = pi[i].mat - mean_pi[i] * eye
        h = h + (m_i @ m_i) / (2.0 * params.m)
    h = h + ground_constant_discrete(params, grid, sigma, v) * eye
    sym = (h + h.conjugate().T.tocsr()) * 0.5
    return SparseOperator(sym.tocsr(), hermitian=True)
