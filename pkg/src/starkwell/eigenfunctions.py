"""Eigenfunctions phi = A Ai(F^{1/3}(x - E/F)) + B Bi(F^{1/3}(x - E/F)).

Coefficients come from the null vector of Lmat - U Mmat, so one code path
serves every boundary condition. Internally they are stored relative to the
same phase-frame Airy pair that the solver uses, which keeps evaluation
accurate when E/F is large; ``coeff_a``/``coeff_b`` give the plain (Ai, Bi)
coefficients. At F = 0 the basis is cos(kx), sin(kx)/k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .airy import X_ASYM, airy_frame, airy_frame_scalar
from .extension import (
    StarkProblem,
    UnitaryBC,
    _free_pair,
    boundary_form,
    frame_reference,
    normalized_residual,
    pencil,
)

__all__ = [
    "Eigenfunction",
    "QuadratureError",
    "coefficient_vector",
    "eigenfunctions",
    "evaluate",
    "evaluate_derivative",
    "normalize",
    "sample_grid",
    "peak_position",
    "inner_product",
    "trace",
    "bc_residual",
    "ode_residual",
    "witness",
]

COEFF_RESIDUAL_TOL = 1e-8
DEGENERACY_TOL = 1e-6
QUAD_TOL = 1e-10
QUAD_DEPTH = 30
_PANELS = 16
_SIGN_GRID = 2001


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Eigenfunction:
    """A solution of -phi'' + F x phi = E phi on [-L, L].

    ``coeffs`` are relative to the evaluation basis (phase-frame Airy pair,
    or the free pair at F = 0). ``norm`` is the L2 norm the coefficients had
    before the last :func:`normalize`.
    """

    energy: float
    coeffs: tuple[complex, complex]
    problem: StarkProblem
    norm: float = math.nan

    def _plain(self):
        """(A, B) with respect to plain (Ai, Bi), undoing the evaluation frame."""
        a, b = self.coeffs
        p = self.problem
        if p.is_free:
            return a, b
        ref = float(frame_reference(self.energy, p))
        if ref > X_ASYM:
            zr = 2.0 / 3.0 * ref * math.sqrt(ref)
            return a * math.exp(zr), b * math.exp(-zr)
        if ref > -X_ASYM:
            return a, b
        zr = -ref
        psi = 2.0 / 3.0 * zr * math.sqrt(zr) - math.pi / 4.0
        c, s = math.cos(psi), math.sin(psi)
        return a * c + b * s, b * c - a * s

    @property
    def coeff_a(self) -> complex:
        return self._plain()[0]

    @property
    def coeff_b(self) -> complex:
        return self._plain()[1]

    def __call__(self, x):
        return evaluate(self, x)


def _check_x(p: StarkProblem, x):
    x = np.asarray(x, dtype=float)
    L = p.half_width
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > L * (1 + 1e-12)):
        raise ValueError(f"x must lie in [-{L}, {L}]")
    return np.clip(x, -L, L)


def _basis(phi: Eigenfunction, x):
    """Basis values and x-derivatives at x: (u1, u1', u2, u2')."""
    p = phi.problem
    E = phi.energy
    if p.is_free:
        c, s, _, _ = _free_pair(x, E)
        return c, -E * s, s, c
    cf = p.cbrt_field
    ref = float(frame_reference(E, p))
    if np.ndim(x) == 0:
        ai, aip, bi, bip = airy_frame_scalar(ref, cf * float(x))
    else:
        ai, aip, bi, bip = airy_frame(ref, cf * x)
    return ai, cf * aip, bi, cf * bip


def evaluate(phi: Eigenfunction, x):
    """phi(x) for x in [-L, L]; complex, scalar or array like ``x``."""
    x = _check_x(phi.problem, x)
    u1, _, u2, _ = _basis(phi, x if x.ndim else float(x))
    a, b = phi.coeffs
    return a * u1 + b * u2


def evaluate_derivative(phi: Eigenfunction, x):
    x = _check_x(phi.problem, x)
    _, d1, _, d2 = _basis(phi, x if x.ndim else float(x))
    a, b = phi.coeffs
    return a * d1 + b * d2


def trace(phi: Eigenfunction) -> tuple[complex, complex, complex, complex]:
    """(phi(-L), phi'(-L), phi(L), phi'(L))."""
    L = phi.problem.half_width
    return tuple(
        complex(f(phi, x)) for x in (-L, L) for f in (evaluate, evaluate_derivative)
    )


def _adaptive_simpson(f, a, b, tol=QUAD_TOL, max_depth=QUAD_DEPTH):
    """Adaptive Simpson on [a, b] with absolute tolerance ``tol``.

    ``f`` must accept arrays. Subintervals are refined breadth-first, one
    vectorized call per level; the acceptance test per subinterval is the
    usual |S(left) + S(right) - S(whole)| <= 15 tol with tol halved on split.
    """
    edges = np.linspace(a, b, _PANELS + 1)
    lo, hi = edges[:-1], edges[1:]
    vals = f(np.concatenate([lo, 0.5 * (lo + hi), hi]))
    fa, fm, fb = np.split(np.asarray(vals), 3)
    whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    tols = np.full(lo.shape, tol / _PANELS)
    total = 0.0
    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = np.split(np.asarray(f(np.concatenate([lm, rm]))), 2)
        left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm)
        right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        done = np.abs(delta) <= 15.0 * tols
        total = total + np.sum((left + right + delta / 15.0)[done])
        if done.all():
            return total
        if depth == max_depth:
            x = mid[~done][0]
            raise QuadratureError(f"adaptive Simpson exceeded depth {max_depth} near x = {x:.6g}")
        k = ~done
        lo, mid, hi = lo[k], mid[k], hi[k]
        fa, flm, fm, frm, fb = fa[k], flm[k], fm[k], frm[k], fb[k]
        left, right, t = left[k], right[k], 0.5 * tols[k]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb])
        whole = np.concatenate([left, right])
        tols = np.concatenate([t, t])
    return total


def inner_product(phi: Eigenfunction, psi: Eigenfunction) -> complex:
    """<phi, psi> = integral of conj(phi) psi over [-L, L]."""
    if phi.problem != psi.problem:
        raise ValueError("eigenfunctions belong to different problems")
    L = phi.problem.half_width
    f = lambda x: np.conj(evaluate(phi, x)) * evaluate(psi, x)  # noqa: E731
    return complex(_adaptive_simpson(f, -L, L))


def _scale(phi: Eigenfunction, factor: complex) -> Eigenfunction:
    a, b = phi.coeffs
    return replace(phi, coeffs=(complex(a * factor), complex(b * factor)))


def _first_extremum_phase(phi: Eigenfunction) -> complex:
    L = phi.problem.half_width
    x = np.linspace(-L, L, _SIGN_GRID)
    v = evaluate(phi, x)
    m = np.abs(v)
    floor = 1e-6 * m.max()
    idx = int(np.argmax(m))
    for i in range(len(m)):
        left = m[i - 1] if i > 0 else -1.0
        right = m[i + 1] if i + 1 < len(m) else -1.0
        if m[i] > floor and m[i] >= left and m[i] >= right:
            idx = i
            break
    return np.conj(v[idx]) / m[idx]


def normalize(phi: Eigenfunction) -> Eigenfunction:
    """Unit L2 norm, with the first extremum of |phi| from the left real and positive."""
    a, b = phi.coeffs
    if a == 0 and b == 0:
        raise ValueError("eigenfunction has zero coefficients")
    L = phi.problem.half_width
    # bring max|phi| to order one first so the absolute tolerance is meaningful
    peak = float(np.max(np.abs(evaluate(phi, np.linspace(-L, L, 257)))))
    if not peak > 0:
        raise ValueError("eigenfunction vanishes on the sample grid")
    pre = _scale(phi, 1.0 / peak)
    sq = float(_adaptive_simpson(lambda x: np.abs(evaluate(pre, x)) ** 2, -L, L))
    norm = math.sqrt(sq)
    out = _scale(pre, 1.0 / norm)
    out = _scale(out, _first_extremum_phase(out))
    return replace(out, norm=norm * peak)


def coefficient_vector(E: float, p: StarkProblem, u: UnitaryBC) -> np.ndarray:
    """Null vectors of Lmat - U Mmat at E, shape (k, 2) with k the multiplicity.

    Rows are coefficients in the evaluation basis. A simple level gives the
    right singular vector of the smallest singular value. A degenerate level
    gives two vectors: at F = 0 the even/odd pair (cos, sin), otherwise both
    right singular vectors.
    """
    E = float(E)
    r = normalized_residual(E, p, u)
    if not r <= COEFF_RESIDUAL_TOL:
        raise ValueError(f"E = {E!r} is not an eigenvalue (residual {r:.3e})")
    A, s = pencil(E, p, u)
    _, sv, vh = np.linalg.svd(A / s[None, :])
    if sv[0] <= DEGENERACY_TOL:
        if p.is_free:
            return np.eye(2, dtype=complex)
        return (vh.conj() / s[None, :]).astype(complex)
    return (vh[-1].conj() / s)[None, :].astype(complex)


def eigenfunctions(E: float, p: StarkProblem, u: UnitaryBC) -> list[Eigenfunction]:
    """Normalized eigenfunctions for the level E; two orthonormal ones if degenerate."""
    vecs = coefficient_vector(E, p, u)
    out = []
    for v in vecs:
        phi = normalize(Eigenfunction(float(E), (complex(v[0]), complex(v[1])), p))
        for prev in out:
            # Gram-Schmidt; a no-op for the F = 0 even/odd pair
            ov = inner_product(prev, phi)
            a, b = phi.coeffs
            pa, pb = prev.coeffs
            phi = normalize(replace(phi, coeffs=(a - ov * pa, b - ov * pb)))
        out.append(phi)
    return out


def sample_grid(phi: Eigenfunction, n_points: int) -> list[tuple[float, complex]]:
    """Uniform samples on [-L, L], endpoints included."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    L = phi.problem.half_width
    x = np.linspace(-L, L, n_points)
    v = evaluate(phi, x)
    return [(float(xi), complex(vi)) for xi, vi in zip(x, v)]


def peak_position(phi: Eigenfunction, n_points: int = 2001, rtol: float = 1e-9) -> float:
    """Location of max |phi| on a uniform grid.

    Samples within ``rtol`` of the maximum count as tied and the midpoint of
    the tied set is returned, so a flat function peaks at the centre instead
    of wherever rounding happens to put it.
    """
    L = phi.problem.half_width
    x = np.linspace(-L, L, n_points)
    m = np.abs(evaluate(phi, x))
    tied = x[m >= (1.0 - rtol) * m.max()]
    return float(0.5 * (tied[0] + tied[-1]))


def bc_residual(phi: Eigenfunction, u: UnitaryBC) -> float:
    """|(L phi'(-L) - i phi(-L), L phi'(L) + i phi(L)) - U (...)| for the sampled trace."""
    L = phi.problem.half_width
    f_m, d_m, f_p, d_p = trace(phi)
    lhs = np.array([L * d_m - 1j * f_m, L * d_p + 1j * f_p])
    rhs = np.array([L * d_m + 1j * f_m, L * d_p - 1j * f_p])
    return float(np.linalg.norm(lhs - u.matrix @ rhs))


def witness(phi: Eigenfunction) -> float:
    """|boundary form| of phi with itself; zero for any self-adjoint condition."""
    return abs(boundary_form(trace(phi), phi.problem.half_width))


def ode_residual(phi: Eigenfunction, n_points: int = 50, h: float = 1e-4) -> float:
    """max |-phi'' + F x phi - E phi| / max|phi| at interior points, phi'' by central difference."""
    L = phi.problem.half_width
    x = np.linspace(-L + 2 * h, L - 2 * h, n_points)
    v = evaluate(phi, x)
    d2 = (evaluate(phi, x + h) - 2.0 * v + evaluate(phi, x - h)) / (h * h)
    res = np.abs(-d2 + (phi.problem.field * x - phi.energy) * v)
    peak = np.max(np.abs(evaluate(phi, np.linspace(-L, L, 201))))
    return float(res.max() / peak)
