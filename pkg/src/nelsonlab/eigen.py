"""Sparse extremal eigensolver and spectral projectors.

lowest_pair is a restart-free Lanczos iteration with full
reorthogonalization and a deterministic all-ones start; the tridiagonal
subproblem goes to scipy's eigh_tridiagonal. Spectral projectors are
realized two ways on purpose: a trapezoidal contour integral of the
resolvent around an isolated eigenvalue, and its Neumann expansion in a
perturbation about a base operator. Keeping both routes separate lets the
cascade compare them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal

from .errors import (
    ConditioningError,
    ConfigError,
    ContractError,
    DivergenceError,
    IterationError,
)
from .fock import SparseOperator, StateVector

__all__ = [
    "EigResult",
    "ContourSpec",
    "lowest_pair",
    "resolvent_apply",
    "contour_projector_apply",
    "neumann_projector_apply",
    "kato_smallness",
]

_DEGENERACY_REL = 1e-9
_BREAKDOWN_REL = 1e-13


@dataclass(frozen=True)
class EigResult:
    """Lowest two eigenvalues, ground vector, and convergence data.

    Invariants: E0 <= E1, ||v0|| = 1 within 1e-12, residual is the explicit
    ||H v0 - E0 v0|| and does not exceed the requested tolerance. degenerate
    flags E1 - E0 < 1e-9 |E0|.
    """

    E0: float
    E1: float
    v0: StateVector
    residual: float
    iterations: int
    degenerate: bool = False


@dataclass(frozen=True)
class ContourSpec:
    """Circle for the projector integral: center, radius, node count, and
    the Neumann expansion length used by the projector comparison."""

    center: float
    radius: float
    n_quad: int = 64
    n_terms: int = 8

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ConfigError("contour radius must be positive")
        if self.n_quad < 8:
            raise ConfigError("contour quadrature needs n_quad >= 8")
        if self.n_terms < 1:
            raise ConfigError("need at least one expansion term")

    def nodes(self):
        theta = 2.0 * np.pi * np.arange(self.n_quad) / self.n_quad
        return self.center + self.radius * np.exp(1j * theta), theta


def _require_hermitian(h: SparseOperator) -> sp.csr_matrix:
    if not isinstance(h, SparseOperator):
        raise ContractError("expected a SparseOperator")
    if not h.hermitian:
        raise ContractError("operator is not flagged hermitian")
    return h.mat


def _dense_pair(a, tol) -> EigResult:
    evals, evecs = np.linalg.eigh(np.asarray(a.todense()))
    e0 = float(evals[0])
    e1 = float(evals[1]) if len(evals) > 1 else float(evals[0])
    v0 = evecs[:, 0]
    res = float(np.linalg.norm(a @ v0 - e0 * v0))
    return EigResult(E0=e0, E1=e1, v0=StateVector(v0), residual=res,
                     iterations=0, degenerate=(e1 - e0) < _DEGENERACY_REL * abs(e0))


def _lanczos_lowest(matvec, n, scale, tol, max_iter, dtype, start=None):
    """Lowest eigenpair by restart-free Lanczos with full reorthogonalization
    from the all-ones start (or a caller-supplied one). Returns (value,
    vector, residual, iterations); residual may exceed tol if the budget ran
    out (caller decides)."""
    v = np.ones(n, dtype=dtype) if start is None else start.astype(dtype)
    v = v / np.linalg.norm(v)
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    replacements = 0
    best = None
    k = 0
    while k < max_iter:
        w = matvec(basis[-1])
        alpha = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(alpha)
        # full reorthogonalization, twice for float safety
        vb = np.column_stack(basis)
        for _ in range(2):
            w = w - vb @ (vb.conjugate().T @ w)
        beta = float(np.linalg.norm(w))
        k += 1

        broke = beta <= _BREAKDOWN_REL * scale
        if (k % 5 == 0) or k >= max_iter or broke:
            if len(alphas) == 1:
                theta = np.array([alphas[0]])
                s = np.array([[1.0]])
            else:
                theta, s = eigh_tridiagonal(
                    np.array(alphas), np.array(betas[:len(alphas) - 1]),
                    select="i", select_range=(0, 0))
            if abs(beta * s[-1, 0]) <= 0.1 * tol or broke or k >= max_iter:
                y0 = vb @ s[:, 0]
                y0 = y0 / np.linalg.norm(y0)
                e0 = float(theta[0])
                res = float(np.linalg.norm(matvec(y0) - e0 * y0))
                if best is None or res < best[2]:
                    best = (e0, y0, res, k)
                if res <= tol:
                    return best

        if broke:
            # invariant subspace; bring in a fresh deterministic direction
            # orthogonal to everything so the sweep can continue
            replacements += 1
            w = np.cos(np.arange(n, dtype=float) + replacements).astype(dtype)
            for _ in range(2):
                w = w - vb @ (vb.conjugate().T @ w)
            nw = np.linalg.norm(w)
            if nw < 1e-10:
                break  # space exhausted
            betas.append(0.0)
            basis.append(w / nw)
        else:
            betas.append(beta)
            basis.append(w / beta)
    return best


def lowest_pair(h: SparseOperator, tol: float = 1e-12,
                max_iter: int | None = None) -> EigResult:
    """Two lowest eigenvalues and the ground vector of a hermitian operator.

    E0 comes from a restart-free, fully reorthogonalized Lanczos sweep
    started at the normalized all-ones vector; E1 from a second sweep with
    the converged ground direction deflated by a rank-one shift, which makes
    degenerate ground levels visible (a single Krylov sequence cannot see
    multiplicity). Convergence means the explicit residual ||H v - E v||
    reaches `tol`. Raises IterationError (with the best partial result
    attached) when the budget is exhausted.
    """
    a = _require_hermitian(h)
    n = a.shape[0]
    if n < 3:
        return _dense_pair(a, tol)
    if max_iter is None:
        max_iter = min(n, 500)
    max_iter = min(max_iter, n)

    dtype = complex if np.iscomplexobj(a.data) else float
    scale = float(abs(a).sum(axis=1).max())  # cheap upper bound on ||A||
    scale = max(scale, 1e-300)

    got0 = _lanczos_lowest(lambda x: a @ x, n, scale, tol, max_iter, dtype)
    if got0 is None or got0[2] > tol:
        raise IterationError(
            f"Lanczos ground sweep did not reach residual {tol:g} in "
            f"{max_iter} iterations"
            + (f" (best {got0[2]:.3e})" if got0 else ""),
            best=got0,
        )
    e0, v0, res0, it0 = got0

    # second sweep with the ground direction shifted out of the way; the
    # start mixes all coordinates with varying signs so eigenvectors
    # orthogonal to the all-ones vector (degenerate partners) stay visible
    shift = 4.0 * scale
    v0c = v0.conjugate()
    start1 = np.cos(1.0 * np.arange(n) + 0.7) + 0.1
    got1 = _lanczos_lowest(
        lambda x: a @ x + (shift * np.dot(v0c, x)) * v0,
        n, scale + shift, tol, max_iter, dtype, start=start1)
    if got1 is None or got1[2] > tol:
        raise IterationError(
            f"Lanczos deflated sweep did not reach residual {tol:g} in "
            f"{max_iter} iterations"
            + (f" (best {got1[2]:.3e})" if got1 else ""),
            best=got1,
        )
    e1 = got1[0]

    return EigResult(
        E0=e0, E1=e1, v0=StateVector(v0), residual=res0,
        iterations=it0 + got1[3],
        degenerate=(e1 - e0) < _DEGENERACY_REL * max(abs(e0), 1e-300),
    )


def resolvent_apply(h: SparseOperator, z: complex, rhs: StateVector,
                    tol: float = 1e-10, _lu=None) -> StateVector:
    """(H - z)^{-1} rhs via sparse LU, with an explicit residual check."""
    a = _require_hermitian(h)
    lu = _lu if _lu is not None else _factorize(a, z)
    b = rhs.amplitudes.astype(complex)
    x = lu.solve(b)
    res = np.linalg.norm(a @ x - z * x - b)
    if not np.isfinite(res) or res > tol * max(np.linalg.norm(b), 1e-300):
        raise ConditioningError(
            f"resolvent solve at z={z} left relative residual "
            f"{res / max(np.linalg.norm(b), 1e-300):.3e}"
        )
    return StateVector(x)


def _factorize(a: sp.csr_matrix, z: complex):
    shifted = (a - z * sp.identity(a.shape[0], dtype=complex, format="csr")).tocsc()
    try:
        return spla.splu(shifted)
    except RuntimeError as exc:
        raise ConditioningError(f"LU factorization failed at z={z}: {exc}") from exc


def contour_projector_apply(h: SparseOperator, spec: ContourSpec,
                            psi: StateVector, tol: float = 1e-10) -> StateVector:
    """Riesz projector applied to psi: -(1/2 pi i) oint (H - z)^{-1} psi dz,
    trapezoidal rule on the circle (spectrally accurate for analytic
    integrands). Warns when an eigenvalue sits close to the contour."""
    a = _require_hermitian(h)
    zs, theta = spec.nodes()
    acc = np.zeros(len(psi.amplitudes), dtype=complex)
    rhs_norm = max(psi.norm(), 1e-300)
    closest = np.inf
    for z, th in zip(zs, theta):
        x = resolvent_apply(h, z, psi, tol=tol).amplitudes
        closest = min(closest, rhs_norm / max(np.linalg.norm(x), 1e-300))
        acc += np.exp(1j * th) * x
    if closest < 1e-6 * spec.radius:
        warnings.warn(
            f"spectrum within ~{closest:.2e} of the contour "
            f"(radius {spec.radius:.2e}); projector may be inaccurate",
            stacklevel=2,
        )
    out = -(spec.radius / spec.n_quad) * acc
    if np.isrealobj(psi.amplitudes) and not np.iscomplexobj(a.data):
        out = np.real_if_close(out, tol=1e6)
        if np.iscomplexobj(out):
            out = out.real  # imaginary part is pure quadrature noise
    return StateVector(out)


def neumann_projector_apply(h_base: SparseOperator, dh: SparseOperator,
                            spec: ContourSpec, psi: StateVector,
                            tol: float = 1e-10):
    """Projector for H_base + dH by expanding each resolvent in dH:

        P psi ~ sum_n -(1/2 pi i) oint R (-dH R)^n psi dz,  R = (H_base-z)^-1.

    Returns (state, term_norms) with term_norms[n] = ||n-th contour term||,
    n = 0 .. spec.n_terms. Raises DivergenceError when the term norms fail
    to decrease three times in a row (expansion outside its disk)."""
    a = _require_hermitian(h_base)
    d = dh.mat
    zs, theta = spec.nodes()
    n = len(psi.amplitudes)
    lus = [_factorize(a, z) for z in zs]
    phases = np.exp(1j * theta)

    terms = []
    increase_streak = 0
    floor = 1e-14 * max(psi.norm(), 1e-300)
    w = [psi.amplitudes.astype(complex) for _ in zs]  # current (-dH R)^n psi
    for order in range(spec.n_terms + 1):
        acc = np.zeros(n, dtype=complex)
        nxt = []
        for i, (lu, ph) in enumerate(zip(lus, phases)):
            x = lu.solve(w[i])
            acc += ph * x
            nxt.append(-(d @ x))
        w = nxt
        terms.append(-(spec.radius / spec.n_quad) * acc)
        if order >= 1:
            tnorm = np.linalg.norm(terms[-1])
            if tnorm >= np.linalg.norm(terms[-2]) and tnorm > floor:
                increase_streak += 1
            else:
                increase_streak = 0
            if increase_streak >= 3:
                raise DivergenceError(
                    "Neumann term norms non-decreasing for 3 consecutive "
                    f"orders at order {order}; perturbation too large"
                )
    out = np.sum(terms, axis=0)
    if np.isrealobj(psi.amplitudes) and not np.iscomplexobj(a.data) \
            and not np.iscomplexobj(d.data if hasattr(d, "data") else d):
        out_r = np.real_if_close(out, tol=1e6)
        out = out_r.real if np.iscomplexobj(out_r) else out_r
    norms = [float(np.linalg.norm(t)) for t in terms]
    return StateVector(out), norms


_KATO_DENSE_CAP = 2048


def kato_smallness(h_base: SparseOperator, dh: SparseOperator,
                   spec: ContourSpec, n_sample: int = 8) -> float:
    """max over sampled contour points of || |H0-z|^{-1/2} dH |H0-z|^{-1/2} ||.

    The absolute value is taken in the functional calculus of the hermitian
    base (|lambda - z| over its real spectrum), so the sandwich is hermitian
    and its norm certifies the relative bound controlling the Neumann series.
    Dense path only; dimensions above the cap raise ContractError.
    """
    a = _require_hermitian(h_base)
    if a.shape[0] > _KATO_DENSE_CAP:
        raise ContractError(
            f"kato_smallness uses a dense decomposition; dim {a.shape[0]} "
            f"exceeds the cap {_KATO_DENSE_CAP}"
        )
    evals, u = np.linalg.eigh(np.asarray(a.todense()))
    ddense = np.asarray(dh.mat.todense())
    zs, _ = spec.nodes()
    step = max(1, len(zs) // n_sample)
    worst = 0.0
    for z in zs[::step]:
        inv_sqrt = 1.0 / np.sqrt(np.abs(evals - z))
        s = (u * inv_sqrt) @ u.conjugate().T
        mid = s @ ddense @ s
        mid = 0.5 * (mid + mid.conjugate().T)
        worst = max(worst, float(np.linalg.norm(mid, 2)))
    return worst
