# File: smoothbench/core/matops.py

"""Dense linear-algebra kernels: factorizations, matrix exponential, Sylvester/Lyapunov solvers.

Everything here is a pure function of its inputs. Sign conventions are fixed so that repeated
calls on identical inputs return bit-identical outputs.
"""

from typing import Optional

import numpy as np
from scipy import linalg as sla

from smoothbench.config import settings
from smoothbench.core.errors import (
    AsymmetryError,
    ConvergenceError,
    DimensionError,
    ExpmOverflowError,
    NotSPDError,
    SingularEquationError,
    StabilityError,
)
from smoothbench.models.linalg_types import SchurForm, SymmetricFactor


def _fix_signs(u: np.ndarray) -> np.ndarray:
    """Per column: +1 if the largest-magnitude entry is positive, else -1."""
    if u.size == 0:
        return np.ones(u.shape[1])
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def numerical_rank(s: np.ndarray, tol_rel: Optional[float] = None) -> int:
    tol = settings.RANK_TOL if tol_rel is None else tol_rel
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD, U·diag(s)·Vt = m, with each left singular vector's largest entry positive."""
    m = np.asarray(m, dtype=np.float64)
    if min(m.shape) == 0:
        k = 0
        return np.zeros((m.shape[0], k)), np.zeros(k), np.zeros((k, m.shape[1]))
    try:
        u, s, vt = sla.svd(m, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        try:
            u, s, vt = sla.svd(m, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as err:
            raise ConvergenceError(f"SVD did not converge for {m.shape} matrix: {err}") from err
    signs = _fix_signs(u)
    return u * signs, s, vt * signs[:, None]


def sym_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix, eigenvalues in non-increasing order."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"sym_eig needs a square matrix, got {m.shape}")
    scale = np.linalg.norm(m, "fro")
    asym = np.linalg.norm(m - m.T, "fro")
    if asym > settings.SYMMETRY_TOL * scale:
        raise AsymmetryError(f"matrix is not symmetric: ‖m−mᵀ‖_F = {asym:.3e}, ‖m‖_F = {scale:.3e}")
    vals, vecs = sla.eigh(0.5 * (m + m.T))
    vals, vecs = vals[::-1], vecs[:, ::-1]
    return vals, vecs * _fix_signs(vecs)


def real_schur(m: np.ndarray) -> SchurForm:
    m = np.asarray(m, dtype=np.float64)
    t, z = sla.schur(m, output="real")
    return SchurForm(unitary=z, quasi_triangular=t)


def stability_margin(a: np.ndarray) -> tuple[float, complex]:
    """Largest eigenvalue real part of `a` and the eigenvalue attaining it."""
    eigs = real_schur(a).eigenvalues()
    if eigs.size == 0:
        return -np.inf, complex(-np.inf)
    worst = eigs[np.argmax(eigs.real)]
    return float(worst.real), complex(worst)


def check_stable(a: np.ndarray) -> None:
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return
    margin = settings.STABILITY_MARGIN * np.linalg.norm(a, 2)
    worst_re, worst = stability_margin(a)
    if worst_re >= -margin:
        raise StabilityError(worst, margin)


def expm(a: np.ndarray, t: float) -> np.ndarray:
    """e^{a·t} by scaling and squaring with a degree-13 Padé approximant (scipy)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expm needs a square matrix, got {a.shape}")
    if t == 0.0:
        return np.eye(a.shape[0])
    at = a * t
    norm = float(np.linalg.norm(at, 1))
    with np.errstate(over="ignore", invalid="ignore"):
        e = sla.expm(at)
    if not np.all(np.isfinite(e)):
        raise ExpmOverflowError(norm)
    return e


def solve_sylvester(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """S with a·S + S·b + c = 0 (Bartels–Stewart through scipy's Schur-based solver)."""
    a, b, c = (np.asarray(x, dtype=np.float64) for x in (a, b, c))
    if c.shape != (a.shape[0], b.shape[0]):
        raise DimensionError(f"sylvester shapes a{a.shape} b{b.shape} c{c.shape} do not match")
    if c.size == 0:
        return np.zeros(c.shape)
    ea = real_schur(a).eigenvalues()
    eb = real_schur(b).eigenvalues()
    gap = float(np.min(np.abs(ea[:, None] + eb[None, :])))
    scale = np.linalg.norm(a, 2) + np.linalg.norm(b, 2)
    if gap <= 1e-14 * max(scale, 1.0):
        raise SingularEquationError(
            f"spectra of a and -b overlap (min |λ_a + λ_b| = {gap:.3e}); Sylvester equation is singular"
        )
    return sla.solve_sylvester(a, b, -c)


def symmetric_factor(f: np.ndarray, tol_rel: Optional[float] = None) -> SymmetricFactor:
    """Wrap f as a SymmetricFactor, compressing to U_k·diag(s_k) when f has redundant columns."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[1] == 0:
        return SymmetricFactor(factor=f, rank=0)
    u, s, _ = svd(f)
    k = numerical_rank(s, tol_rel)
    if k == f.shape[1]:
        return SymmetricFactor(factor=f, rank=k)
    return SymmetricFactor(factor=u[:, :k] * s[:k], rank=k)


def factor_psd(m: np.ndarray, tol_rel: Optional[float] = None) -> SymmetricFactor:
    """Square-root factor of a symmetric PSD matrix; eigenvalues below tol² relative are dropped."""
    vals, vecs = sym_eig(0.5 * (m + m.T))
    tol = settings.RANK_TOL if tol_rel is None else tol_rel
    if vals.size == 0 or vals[0] <= 0.0:
        return SymmetricFactor(factor=np.zeros((m.shape[0], 0)), rank=0)
    # tol applies to the factor's singular values, i.e. sqrt of the eigenvalues; eigenvalues
    # under the eigensolver's roundoff level are noise whatever tol says
    floor = max(tol**2, 10.0 * m.shape[0] * np.finfo(np.float64).eps)
    keep = vals > floor * vals[0]
    f = vecs[:, keep] * np.sqrt(vals[keep])
    return SymmetricFactor(factor=f, rank=int(np.count_nonzero(keep)))


def solve_lyapunov(a: np.ndarray, rhs_factor: SymmetricFactor) -> SymmetricFactor:
    """Factor L of the solution of a·X + X·aᵀ = −F·Fᵀ, with F = rhs_factor.factor."""
    a = np.asarray(a, dtype=np.float64)
    f = rhs_factor.factor
    if f.shape[0] != a.shape[0]:
        raise DimensionError(f"lyapunov rhs factor has {f.shape[0]} rows, a is {a.shape}")
    check_stable(a)
    if rhs_factor.rank == 0 or not np.any(f):
        return SymmetricFactor(factor=np.zeros((a.shape[0], 0)), rank=0)
    x = sla.solve_continuous_lyapunov(a, -(f @ f.T))
    return factor_psd(0.5 * (x + x.T))


def cholesky_spd(m: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"cholesky needs a square matrix, got {m.shape}")
    scale = np.linalg.norm(m, "fro")
    if np.linalg.norm(m - m.T, "fro") > settings.SYMMETRY_TOL * scale:
        raise NotSPDError("matrix is not symmetric")
    try:
        return sla.cholesky(0.5 * (m + m.T), lower=True)
    except np.linalg.LinAlgError as err:
        raise NotSPDError(f"matrix is not positive definite: {err}") from err
