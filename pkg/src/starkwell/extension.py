"""Self-adjoint boundary conditions for the Stark operator -d^2/dx^2 + F x on [-L, L].

Every self-adjoint realization is fixed by a unitary U in U(2) through

    (L phi'(-L) - i phi(-L), L phi'(L) + i phi(L))^T
        = U (L phi'(-L) + i phi(-L), L phi'(L) - i phi(L))^T.

Writing phi = A u1 + B u2 in a basis of solutions of the eigenvalue
equation turns this into (Lmat - U Mmat)(A, B)^T = 0, so eigenvalues are the
real zeros of det(Lmat - U Mmat). For F > 0 the basis is the Airy pair at
F^{1/3}(x - E/F); at F = 0 it is the entire-in-E pair cos(sqrt(E) x),
sin(sqrt(E) x)/sqrt(E).

Derivative entries carry the chain-rule factor F^{1/3}, so every matrix here
is expressed in the physical variable x.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .airy import airy_frame

__all__ = [
    "FREE_FIELD",
    "PRESET_NAMES",
    "StarkProblem",
    "ScaledEndpoints",
    "UnitaryBC",
    "BoundaryMatrices",
    "NonUnitaryError",
    "make_unitary",
    "preset",
    "parse_bc",
    "scaled_endpoints",
    "basis_trace",
    "boundary_matrices",
    "pencil",
    "characteristic",
    "free_characteristic",
    "reduced_characteristic",
    "normalized_residual",
    "scaled_singular_values",
    "boundary_form",
]

# below this field strength the Airy change of variables is abandoned
FREE_FIELD = 1e-12
UNITARY_TOL = 1e-10

PRESET_NAMES = ("dirichlet", "neumann", "mixed", "periodic")

_PRESET_MATRICES = {
    "dirichlet": [[1, 0], [0, 1]],
    "neumann": [[-1, 0], [0, -1]],
    "mixed": [[1, 0], [0, -1]],
    "periodic": [[0, 1], [1, 0]],
}


class NonUnitaryError(ValueError):
    """Boundary matrix fails U*U = I; ``deviation`` is max |U*U - I|."""

    def __init__(self, deviation: float):
        super().__init__(f"boundary matrix is not unitary: max|U*U - I| = {deviation:.3e}")
        self.deviation = deviation


@dataclass(frozen=True)
class StarkProblem:
    """Interval half-width L and field strength F."""

    half_width: float
    field: float

    def __post_init__(self):
        L, F = self.half_width, self.field
        if not (math.isfinite(L) and L > 0):
            raise ValueError(f"half_width must be finite and > 0, got {L!r}")
        if not (math.isfinite(F) and F >= 0):
            raise ValueError(f"field must be finite and >= 0, got {F!r}")

    @property
    def is_free(self) -> bool:
        return self.field < FREE_FIELD

    @property
    def cbrt_field(self) -> float:
        return self.field ** (1.0 / 3.0)


@dataclass(frozen=True)
class ScaledEndpoints:
    l_plus: float
    l_minus: float


def _unitarity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(2))))


@dataclass(frozen=True, eq=False)
class UnitaryBC:
    """A 2x2 unitary matrix selecting one self-adjoint extension."""

    matrix: np.ndarray
    name: str | None = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise ValueError(f"boundary matrix must be a finite 2x2 array, got shape {m.shape}")
        defect = _unitarity_defect(m)
        if defect > UNITARY_TOL:
            raise NonUnitaryError(defect)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def defect(self) -> float:
        return _unitarity_defect(self.matrix)

    @property
    def is_preset(self) -> bool:
        return self.name in PRESET_NAMES

    def __eq__(self, other):
        if not isinstance(other, UnitaryBC):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"UnitaryBC({label}{self.matrix.tolist()})"


@dataclass(frozen=True)
class BoundaryMatrices:
    l_mat: np.ndarray
    m_mat: np.ndarray


def make_unitary(theta: float, alpha: complex, beta: complex) -> UnitaryBC:
    """``exp(i theta) [[alpha, beta], [-conj(beta), conj(alpha)]]``.

    (alpha, beta) within 1e-6 of the unit sphere are renormalized; anything
    further off is rejected.
    """
    alpha, beta = complex(alpha), complex(beta)
    r2 = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(r2 - 1.0) > 1e-6:
        raise ValueError(f"|alpha|^2 + |beta|^2 = {r2!r}, expected 1")
    r = math.sqrt(r2)
    alpha, beta = alpha / r, beta / r
    m = cmath.exp(1j * theta) * np.array([[alpha, beta], [-beta.conjugate(), alpha.conjugate()]])
    return UnitaryBC(m)


def preset(name: str) -> UnitaryBC:
    key = name.lower()
    if key not in _PRESET_MATRICES:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return UnitaryBC(np.array(_PRESET_MATRICES[key], dtype=complex), name=key)


_ENTRY = re.compile(r"^[0-9eE.+\-ij]+$")


def _parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if not t or not _ENTRY.match(t):
        raise ValueError(f"cannot parse complex entry {text!r}")
    t = t.replace("i", "j")
    if t in ("j", "+j", "-j"):
        t = t.replace("j", "1j")
    elif t.endswith("j") and t[-2:-1] in ("+", "-"):
        t = t[:-1] + "1j"
    return complex(t)


def parse_bc(text: str) -> UnitaryBC:
    """Preset name, or four entries ``a,b;c,d`` each written ``re+imi``."""
    t = text.strip()
    if t.lower() in PRESET_NAMES:
        return preset(t)
    rows = t.split(";")
    if len(rows) != 2:
        raise ValueError(f"boundary matrix {text!r} must have two ';'-separated rows")
    entries = [[_parse_complex(e) for e in row.split(",")] for row in rows]
    if any(len(r) != 2 for r in entries):
        raise ValueError(f"boundary matrix {text!r} must have two ','-separated entries per row")
    return UnitaryBC(np.array(entries, dtype=complex))


def scaled_endpoints(E: float, p: StarkProblem) -> ScaledEndpoints:
    """L+ = F^{1/3}(L - E/F), L- = -F^{1/3}(L + E/F)."""
    if p.field <= 0:
        raise ValueError("scaled endpoints are undefined at F = 0")
    c = p.cbrt_field
    L, F = p.half_width, p.field
    return ScaledEndpoints(c * (L - E / F), -c * (L + E / F))


# ---------------------------------------------------------------------------
# solution basis and its boundary trace
# ---------------------------------------------------------------------------


def frame_reference(E, p: StarkProblem):
    """Airy argument at x = 0, -E/F^{2/3}; anchors the phase frame."""
    return -np.asarray(E, dtype=float) / p.field ** (2.0 / 3.0)


def _free_pair(x, E):
    """c(x, E), s(x, E) and their E-derivatives, elementwise in E."""
    E = np.asarray(E, dtype=float)
    k = np.sqrt(np.abs(E))
    kx = k * x
    pos = E > 0
    safe_k = np.where(k > 0, k, 1.0)
    c = np.where(pos, np.cos(kx), np.cosh(kx))
    s = np.where(pos, np.sin(kx), np.sinh(kx)) / safe_k
    s = np.where(k > 0, s, x)
    dc = -0.5 * x * s
    small = np.abs(E) * x * x < 0.5
    safe_E = np.where(small, 1.0, E)
    ds = np.where(small, 0.0, (x * c - s) / (2.0 * safe_E))
    if np.any(small):
        # d/dE of sum_n (-E)^n x^{2n+1} / (2n+1)!
        acc = np.zeros_like(E)
        for n in range(1, 14):
            acc = acc + n * (-1) ** n * E ** (n - 1) * x ** (2 * n + 1) / math.factorial(2 * n + 1)
        ds = np.where(small, acc, ds)
    return c, s, dc, ds


def basis_trace(E, p: StarkProblem, with_derivative: bool = False):
    """Boundary data of the two basis solutions.

    Returns ``T`` with shape ``E.shape + (4, 2)``: rows are u(-L), u'(-L),
    u(L), u'(L) (derivatives in x), columns the two basis functions. With
    ``with_derivative`` also returns dT/dE.

    For F > 0 the Airy pair is taken in the phase frame anchored at
    -E/F^{2/3}; the frame is a rotation of the basis, so determinants built
    from ``T`` are those of the plain (Ai, Bi) basis.
    """
    E = np.asarray(E, dtype=float)
    L = p.half_width
    T = np.empty(E.shape + (4, 2))
    dT = np.empty(E.shape + (4, 2)) if with_derivative else None
    if p.is_free:
        for row, x in ((0, -L), (2, L)):
            c, s, dc, ds = _free_pair(x, E)
            T[..., row, 0] = c
            T[..., row, 1] = s
            T[..., row + 1, 0] = -E * s
            T[..., row + 1, 1] = c
            if with_derivative:
                dT[..., row, 0] = dc
                dT[..., row, 1] = ds
                dT[..., row + 1, 0] = -s - E * ds
                dT[..., row + 1, 1] = dc
        return (T, dT) if with_derivative else T
    c = p.cbrt_field
    dz = -1.0 / p.field ** (2.0 / 3.0)  # d(argument)/dE
    ref = frame_reference(E, p)
    for row, sgn in ((0, -1.0), (2, 1.0)):
        off = np.full_like(ref, sgn * c * L)
        ai, aip, bi, bip = airy_frame(ref, off)
        T[..., row, 0] = ai
        T[..., row, 1] = bi
        T[..., row + 1, 0] = c * aip
        T[..., row + 1, 1] = c * bip
        if with_derivative:
            arg = ref + off
            dT[..., row, 0] = dz * aip
            dT[..., row, 1] = dz * bip
            dT[..., row + 1, 0] = c * dz * arg * ai
            dT[..., row + 1, 1] = c * dz * arg * bi
    return (T, dT) if with_derivative else T


def _lm_from_trace(T, L):
    lm = np.empty(T.shape[:-2] + (2, 2), dtype=complex)
    lm[..., 0, :] = L * T[..., 1, :] - 1j * T[..., 0, :]
    lm[..., 1, :] = L * T[..., 3, :] + 1j * T[..., 2, :]
    return lm


def boundary_matrices(E: float, p: StarkProblem) -> BoundaryMatrices:
    """The pair (Lmat, Mmat) with Mmat = conj(Lmat) for real E."""
    lm = _lm_from_trace(basis_trace(float(E), p), p.half_width)
    return BoundaryMatrices(lm, lm.conj())


def pencil(E, p: StarkProblem, u: UnitaryBC, with_derivative: bool = False):
    """A(E) = Lmat - U Mmat, its column scales, and optionally dA/dE.

    The column scales are the norms of the columns of Lmat; dividing by them
    makes quantities independent of how each basis function is normalized.
    """
    L = p.half_width
    if with_derivative:
        T, dT = basis_trace(E, p, True)
    else:
        T = basis_trace(E, p)
    lm = _lm_from_trace(T, L)
    U = u.matrix
    A = lm - U @ lm.conj()
    scales = np.linalg.norm(lm, axis=-2)
    if not with_derivative:
        return A, scales
    dlm = _lm_from_trace(dT, L)
    return A, scales, dlm - U @ dlm.conj()


def _det2(A):
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def _ddet2(A, dA):
    return (
        dA[..., 0, 0] * A[..., 1, 1]
        + A[..., 0, 0] * dA[..., 1, 1]
        - dA[..., 0, 1] * A[..., 1, 0]
        - A[..., 0, 1] * dA[..., 1, 0]
    )


def characteristic(E, p: StarkProblem, u: UnitaryBC):
    """det(Lmat(E) - U Mmat(E)); zero exactly at eigenvalues of H_U."""
    A, _ = pencil(E, p, u)
    d = _det2(A)
    return complex(d) if np.ndim(d) == 0 else d


def free_characteristic(E, p: StarkProblem, u: UnitaryBC):
    """The F = 0 characteristic in the basis cos(kx), sin(kx)/k."""
    if p.field != 0:
        raise ValueError("free_characteristic requires F = 0")
    return characteristic(E, p, u)


def normalized_residual(E, p: StarkProblem, u: UnitaryBC):
    """|det A| / (|col1 Lmat| |col2 Lmat|), a number in [0, 4]."""
    A, s = pencil(E, p, u)
    r = np.abs(_det2(A)) / (s[..., 0] * s[..., 1])
    return float(r) if np.ndim(r) == 0 else r


def scaled_singular_values(E, p: StarkProblem, u: UnitaryBC):
    """Singular values (descending) of A with columns divided by the Lmat column norms."""
    A, s = pencil(E, p, u)
    sv = np.linalg.svd(A / s[..., None, :], compute_uv=False)
    return sv


def realified(E, p: StarkProblem, u: UnitaryBC, with_derivative: bool = False):
    """det A / sqrt(det U): real-valued for real E and any unitary U.

    For self-adjoint conditions Lmat Mmat^{-1} is unitary, which pins the phase
    of det(Lmat - U Mmat) to arg(det U)/2 modulo pi. Also returns the column
    scales, so ``value / (s1 s2)`` is the signed normalized residual.
    """
    root = cmath.sqrt(complex(np.linalg.det(u.matrix)))
    if with_derivative:
        A, s, dA = pencil(E, p, u, True)
        return (_det2(A) / root).real, s, (_ddet2(A, dA) / root).real
    A, s = pencil(E, p, u)
    return (_det2(A) / root).real, s


def _reduced_from_trace(name, a, b):
    """Per-case real determinant; ``a``/``b`` are (value-, deriv-, value+, deriv+)."""
    am, apm, ap, app = a
    bm, bpm, bp, bpp = b
    if name == "dirichlet":
        return am * bp - ap * bm
    if name == "neumann":
        return apm * bpp - app * bpm
    if name == "mixed":
        return app * bm - am * bpp
    if name == "periodic":
        return (apm - app) * (bp - bm) - (ap - am) * (bpm - bpp)
    raise ValueError(f"unknown case {name!r}; choose from {', '.join(PRESET_NAMES)}")


def _natural_trace(T, p):
    # Airy derivatives w.r.t. their own argument, as in the closed-form case equations
    if p.is_free:
        return T
    out = T.copy()
    out[..., 1, :] /= p.cbrt_field
    out[..., 3, :] /= p.cbrt_field
    return out


def reduced_characteristic(E, p: StarkProblem, name: str, with_derivative: bool = False):
    """Real determinant expression of a preset case.

    Dirichlet  Ai(L-)Bi(L+) - Ai(L+)Bi(L-)
    Neumann    Ai'(L-)Bi'(L+) - Ai'(L+)Bi'(L-)
    mixed      Ai'(L+)Bi(L-) - Ai(L-)Bi'(L+)
    periodic   (Ai'(L-) - Ai'(L+))(Bi(L+) - Bi(L-)) - (Ai(L+) - Ai(L-))(Bi'(L-) - Bi'(L+))

    At F = 0 the same expressions are taken in the free basis. Zeros coincide
    with those of :func:`characteristic` for the matching preset.
    """
    name = name.lower()
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown case {name!r}; choose from {', '.join(PRESET_NAMES)}")
    if with_derivative:
        T, dT = basis_trace(E, p, True)
        T, dT = _natural_trace(T, p), _natural_trace(dT, p)
    else:
        T = _natural_trace(basis_trace(E, p), p)
    cols = [tuple(T[..., r, j] for r in range(4)) for j in range(2)]
    f = _reduced_from_trace(name, *cols)
    if not with_derivative:
        return float(f) if np.ndim(f) == 0 else f
    # product rule: differentiate one factor at a time
    dcols = [tuple(dT[..., r, j] for r in range(4)) for j in range(2)]
    df = _reduced_from_trace(name, dcols[0], cols[1]) + _reduced_from_trace(name, cols[0], dcols[1])
    if np.ndim(f) == 0:
        return float(f), float(df)
    return f, df


def boundary_form(trace, L: float) -> float:
    """(1/2i)(phi'(L) conj phi(L) - phi(L) conj phi'(L) - phi'(-L) conj phi(-L) + phi(-L) conj phi'(-L)).

    ``trace`` is (phi(-L), phi'(-L), phi(L), phi'(L)).
    """
    if not L > 0:
        raise ValueError("L must be positive")
    fm, dfm, fp, dfp = (complex(v) for v in trace)
    val = (
        dfp * fp.conjugate() - fp * dfp.conjugate() - dfm * fm.conjugate() + fm * dfm.conjugate()
    ) / 2j
    return val.real
