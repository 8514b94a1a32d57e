"""Eigenvalue search for H_U: bracket scan, safeguarded Newton, dip resolution.

The scan samples a real characteristic on a grid and refines every sign
change with Newton steps that fall back to bisection whenever they would
leave the current bracket. Two roots closer than one grid step (the split
pairs of the periodic case) leave no sign change; they show up instead as a
dip of the smallest scaled singular value of Lmat - U Mmat, which triggers a
fine rescan of the dip, and, failing that, a golden-section minimization
that also catches exactly degenerate levels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .airy import X_ASYM, X_MAX
from .extension import (
    StarkProblem,
    UnitaryBC,
    normalized_residual,
    parse_bc,
    realified,
    reduced_characteristic,
    scaled_singular_values,
)

__all__ = [
    "ConvergenceError",
    "Eigenvalue",
    "SpectrumRequest",
    "bracket_scan",
    "refine_root",
    "solve_spectrum",
    "solve_generic",
    "detect_degeneracy",
    "default_scan_step",
    "default_floor",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
BRACKET_TOL = 1e-10
MAX_ITER = 200
FINE_STEP = 1e-4
DEGENERACY_TOL = 1e-6
DEDUPE_TOL = 1e-9
EDGE_TOL = 1e-10
MERGE_TOL = 1e-5


class ConvergenceError(RuntimeError):
    """Root refinement failed; ``bracket`` is the interval that was being refined."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (bracket [{bracket[0]:.12g}, {bracket[1]:.12g}])")
        self.bracket = bracket


@dataclass(frozen=True)
class Eigenvalue:
    energy: float
    residual: float
    multiplicity: int = 1
    bracket: tuple[float, float] = (math.nan, math.nan)


def default_scan_step(problem: StarkProblem) -> float:
    """Half the smallest free-particle level spacing, capped at 0.5."""
    return min(0.5, math.pi ** 2 / (8.0 * problem.half_width ** 2))


def robin_strength(problem: StarkProblem, bc: UnitaryBC) -> float:
    """Largest attractive boundary coupling beta of U, in units of 1/length.

    On the eigenvector of U with eigenvalue exp(i theta) the condition reads
    L phi' = -cot(theta/2) phi (outward normal), so the boundary term of the
    quadratic form is at least -beta (|phi(-L)|^2 + |phi(L)|^2) with
    beta = max(0, cot(theta/2)) / L. theta = 0 is a Dirichlet direction and
    contributes nothing.
    """
    theta = np.angle(np.linalg.eigvals(bc.matrix))
    theta = theta[np.abs(theta) > 1e-12]
    if theta.size == 0:
        return 0.0
    cot = np.cos(theta / 2) / np.sin(theta / 2)
    return max(0.0, float(cot.max())) / problem.half_width


def default_floor(problem: StarkProblem, bc: UnitaryBC) -> float:
    """Lower end of the default search window, below every eigenvalue.

    Uses |phi(a)|^2 <= eps ||phi'||^2 + (1/eps + 1/(2L)) ||phi||^2 with
    eps = 1/(2 beta) at each end, which gives E >= -F L - 4 beta^2 - beta / L.
    The presets have beta = 0, so their floor is -F L. A unit margin is
    subtracted either way so no level sits on the window edge.
    """
    L, F = problem.half_width, problem.field
    beta = robin_strength(problem, bc)
    return -F * L - 4.0 * beta * beta - beta / L - 1.0


def _lowest_representable(problem: StarkProblem) -> float:
    """Lowest energy whose boundary data the Airy frames can hold without overflow."""
    L = problem.half_width
    if problem.is_free:
        return -((700.0 / L) ** 2)
    reach = problem.cbrt_field * L
    # scaled frame: exponent step ~ reach * sqrt(ref) must stay below ~700
    ref = min((690.0 / reach) ** 2, 1e12)
    if reach >= ref - X_ASYM:
        ref = min(ref, X_MAX)
    return -(problem.field ** (2.0 / 3.0)) * ref


@dataclass
class SpectrumRequest:
    """What to solve: problem, boundary condition and energy range.

    ``count`` asks for the first n eigenvalues (distinct levels; a degenerate
    level is one entry with multiplicity 2). The window is then widened
    upward until enough are found.
    """

    problem: StarkProblem
    bc: UnitaryBC | str
    window: tuple[float, float] | None = None
    count: int | None = None
    scan_step: float | None = None

    def __post_init__(self):
        if isinstance(self.bc, str):
            self.bc = parse_bc(self.bc)
        if self.window is None and self.count is None:
            raise ValueError("give a window, a count, or both")
        if self.window is not None:
            lo, hi = (float(v) for v in self.window)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid window {self.window!r}")
            self.window = (lo, hi)
        if self.count is not None and int(self.count) < 1:
            raise ValueError("count must be >= 1")
        if self.scan_step is None:
            self.scan_step = default_scan_step(self.problem)
        elif not self.scan_step > 0:
            raise ValueError("scan_step must be positive")


class _Target:
    """Real characteristic with derivative, plus the singular-value diagnostics."""

    def __init__(self, problem: StarkProblem, bc: UnitaryBC, use_reduced: bool):
        self.problem = problem
        self.bc = bc
        self.case = bc.name if (use_reduced and bc.is_preset) else None

    def f(self, E):
        if self.case:
            return reduced_characteristic(E, self.problem, self.case)
        return realified(E, self.problem, self.bc)[0]

    def f_df(self, E):
        if self.case:
            return reduced_characteristic(E, self.problem, self.case, with_derivative=True)
        g, _, dg = realified(E, self.problem, self.bc, with_derivative=True)
        return float(g), float(dg)

    def sigma(self, E):
        return scaled_singular_values(E, self.problem, self.bc)

    def sigma_min(self, E):
        return self.sigma(E)[..., -1]

    def residual(self, E):
        return normalized_residual(E, self.problem, self.bc)


def bracket_scan(req: SpectrumRequest, f, window: tuple[float, float] | None = None):
    """Sign-change intervals of ``f`` (vectorized) on a grid over the window.

    Intervals are at most ``req.scan_step`` wide. A grid point where f is
    exactly zero is returned as the degenerate interval (E, E).
    """
    lo, hi = window if window is not None else req.window
    if not lo < hi:
        raise ValueError(f"invalid window ({lo!r}, {hi!r})")
    grid = _grid(lo, hi, req.scan_step)
    return _sign_changes(grid, np.asarray(f(grid), dtype=float))


def _grid(lo, hi, step):
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    return np.linspace(lo, hi, n)


def _sign_changes(grid, vals):
    out = []
    for i in range(len(grid)):
        if vals[i] == 0.0:
            out.append((float(grid[i]), float(grid[i])))
        elif i + 1 < len(grid) and vals[i + 1] != 0.0 and (vals[i] < 0) != (vals[i + 1] < 0):
            out.append((float(grid[i]), float(grid[i + 1])))
    return out


def refine_root(bracket, f, df, residual=None, f_df=None) -> Eigenvalue:
    """Safeguarded Newton iteration inside a sign-change bracket.

    Newton steps that leave the bracket, or fail to halve the previous step,
    are replaced by bisection. Stops once the bracket is at most 1e-10 wide.
    ``residual`` (default ``|f|``) is checked against 1e-8 at the result.
    ``f_df`` may supply value and derivative in one call.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if f_df is None:
        f_df = lambda x: (f(x), df(x))  # noqa: E731
    residual = residual or (lambda x: abs(f(x)))
    if a == b:
        return _accept(a, (a, b), residual)
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return _accept(a, (a, a), residual)
    if fb == 0.0:
        return _accept(b, (b, b), residual)
    if (fa < 0) == (fb < 0):
        raise ValueError(f"no sign change on [{a}, {b}]")
    lo_neg = fa < 0
    fa, fb = abs(fa), abs(fb)
    x = 0.5 * (a + b)
    step_old = b - a
    step = step_old
    for _ in range(MAX_ITER):
        if b - a <= BRACKET_TOL:
            # report the evaluated end with the smaller |f|
            return _accept(a if fa <= fb else b, (a, b), residual)
        fx, dfx = f_df(x)
        if fx == 0.0:
            return _accept(x, (x, x), residual)
        if (fx < 0) == lo_neg:
            a, fa = x, abs(fx)
        else:
            b, fb = x, abs(fx)
        newton = x - fx / dfx if dfx != 0.0 and math.isfinite(dfx) else math.nan
        step_old, step = step, abs(newton - x) if math.isfinite(newton) else math.inf
        if not (a < newton < b) or step > 0.5 * step_old:
            x = 0.5 * (a + b)
            step = b - a
        elif step < 0.25 * BRACKET_TOL:
            # Newton has converged; probe just across the root to close the bracket
            nudge = 0.45 * BRACKET_TOL
            x = newton + (nudge if newton - x > 0 else -nudge)
            if not a < x < b:
                x = 0.5 * (a + b)
        else:
            x = newton
    raise ConvergenceError(f"no convergence after {MAX_ITER} iterations", (a, b))


def _accept(root, bracket, residual) -> Eigenvalue:
    r = float(residual(root))
    if not r <= RESIDUAL_TOL:
        raise ConvergenceError(f"residual {r:.3e} at E = {root!r} exceeds {RESIDUAL_TOL}", bracket)
    return Eigenvalue(float(root), r, 1, (float(bracket[0]), float(bracket[1])))


def detect_degeneracy(E: float, req: SpectrumRequest) -> int:
    """2 when both scaled singular values of Lmat - U Mmat vanish at E, else 1."""
    sv = scaled_singular_values(float(E), req.problem, req.bc)
    return 2 if sv[0] <= DEGENERACY_TOL else 1


def _golden_min(fn, a, b, tol=1e-12):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (c, fc, (a, b)) if fc <= fd else (d, fd, (a, b))


def _refine_all(target: _Target, brackets):
    return [
        refine_root(br, target.f, None, residual=target.residual, f_df=target.f_df)
        for br in brackets
    ]


def _resolve_dip(target: _Target, a: float, b: float, suspects: list):
    """Roots hidden in [a, b]: a close pair, a degenerate level, or nothing."""
    grid = _grid(a, b, FINE_STEP)
    found = _refine_all(target, _sign_changes(grid, target.f(grid)))
    if found:
        return found
    smin = lambda x: float(target.sigma_min(x))  # noqa: E731
    E, s, br = _golden_min(smin, a, b)
    if s > RESIDUAL_TOL:
        if s < 1e-3:
            suspects.append((E, s))
        return []
    # a split pair narrower than the fine grid; look once more, closer in
    grid = _grid(E - 2 * FINE_STEP, E + 2 * FINE_STEP, FINE_STEP / 1000.0)
    found = _refine_all(target, _sign_changes(grid, target.f(grid)))
    if found:
        return found
    return [Eigenvalue(float(E), float(target.residual(E)), 1, br)]


def _scan(target: _Target, lo: float, hi: float, step: float, suspects: list):
    # pad so a root sitting on a window edge still shows a sign change;
    # _merge then keeps it only if it lies within EDGE_TOL of the window
    pad = 100 * EDGE_TOL * max(1.0, abs(lo), abs(hi))
    grid = _grid(lo - pad, hi + pad, step)
    f = target.f(grid)
    brackets = _sign_changes(grid, f)
    found = _refine_all(target, brackets)
    smin = target.sigma_min(grid)
    covered = np.zeros(len(grid), dtype=bool)
    for i in range(len(grid)):
        if f[i] == 0.0:
            covered[max(i - 1, 0) : i + 2] = True
        elif i + 1 < len(grid) and f[i + 1] != 0.0 and (f[i] < 0) != (f[i + 1] < 0):
            covered[i : i + 2] = True
    for i in range(1, len(grid) - 1):
        if smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1] and not covered[i]:
            found.extend(_resolve_dip(target, grid[i - 1], grid[i + 1], suspects))
    return found


def _merge(values, lo, hi):
    values = sorted(values, key=lambda e: e.energy)
    out = []
    for ev in values:
        if ev.energy < lo - EDGE_TOL or ev.energy > hi + EDGE_TOL:
            continue
        if out and abs(ev.energy - out[-1].energy) <= DEDUPE_TOL:
            if ev.multiplicity > out[-1].multiplicity:
                out[-1] = ev
            continue
        out.append(ev)
    return out


def _finalize_multiplicity(values, req):
    """Tag degenerate levels; adjacent roots that are both degenerate are one level."""
    tagged = [
        Eigenvalue(ev.energy, ev.residual, detect_degeneracy(ev.energy, req), ev.bracket) for ev in values
    ]
    out = []
    for ev in tagged:
        prev = out[-1] if out else None
        if (
            prev is not None
            and prev.multiplicity == 2
            and ev.multiplicity == 2
            and ev.energy - prev.energy <= MERGE_TOL * max(1.0, abs(ev.energy))
        ):
            mid = 0.5 * (prev.energy + ev.energy)
            r = float(normalized_residual(mid, req.problem, req.bc))
            if r <= RESIDUAL_TOL:
                out[-1] = Eigenvalue(mid, r, 2, (prev.bracket[0], ev.bracket[1]))
                continue
        out.append(ev)
    return out


def _solve(req: SpectrumRequest, use_reduced: bool, suspects: list | None = None):
    suspects = [] if suspects is None else suspects
    target = _Target(req.problem, req.bc, use_reduced)
    step = req.scan_step
    floor = _lowest_representable(req.problem)
    if req.window is not None:
        lo, hi = req.window
    else:
        lo = default_floor(req.problem, req.bc)
        hi = lo + step * 8
    if lo < floor:
        if default_floor(req.problem, req.bc) < floor:
            raise ValueError(
                f"eigenvalues may lie below {floor:.6g}, the lowest energy the Airy kernel can represent"
            )
        lo = floor
        if lo >= hi:
            return []
    if req.count is None:
        return _finalize_multiplicity(_merge(_scan(target, lo, hi, step, suspects), lo, hi), req)
    # count mode: widen upward until enough levels are in hand
    L, F = req.problem.half_width, req.problem.field
    guess = ((req.count + 1) * math.pi / (2.0 * L)) ** 2 + F * L + 1.0
    hi = max(hi, lo + guess)
    raw = _merge(_scan(target, lo, hi, step, suspects), lo, hi)
    vals = _finalize_multiplicity(raw, req)
    while len(vals) < req.count:
        new_hi = hi + max(hi - lo, 1.0)
        raw = _merge(raw + _scan(target, hi - 2 * step, new_hi, step, suspects), lo, new_hi)
        vals = _finalize_multiplicity(raw, req)
        hi = new_hi
    return vals[: req.count]


def solve_spectrum(req: SpectrumRequest) -> list[Eigenvalue]:
    """Eigenvalues in ascending order.

    Presets use their real closed-form characteristic; any other U goes
    through :func:`solve_generic`.
    """
    if not req.bc.is_preset:
        return solve_generic(req)
    return _solve(req, use_reduced=True)


def solve_generic(req: SpectrumRequest, suspects: list | None = None) -> list[Eigenvalue]:
    """Eigenvalues for an arbitrary unitary U.

    Works from det(Lmat - U Mmat) / sqrt(det U), which is real on the real
    axis, and from the smallest scaled singular value of Lmat - U Mmat,
    whose dips locate pairs and degenerate levels. Dips whose minimum stays
    above the acceptance threshold are appended to ``suspects`` as
    ``(energy, sigma_min)`` and logged, never reported as eigenvalues.
    """
    suspects = [] if suspects is None else suspects
    vals = _solve(req, use_reduced=False, suspects=suspects)
    for E, s in suspects:
        log.warning("sigma_min dip at E=%.10g (%.3e) not accepted as an eigenvalue", E, s)
    out = []
    for ev in vals:
        smin = float(scaled_singular_values(ev.energy, req.problem, req.bc)[-1])
        if smin > RESIDUAL_TOL:
            suspects.append((ev.energy, smin))
            log.warning("root at E=%.10g rejected: sigma_min %.3e", ev.energy, smin)
            continue
        out.append(ev)
    return out
