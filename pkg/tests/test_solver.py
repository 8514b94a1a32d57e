import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from _oracle import collocation_spectrum
from starkwell.extension import StarkProblem, UnitaryBC, make_unitary, preset, reduced_characteristic
from starkwell.solver import (
    ConvergenceError,
    Eigenvalue,
    SpectrumRequest,
    bracket_scan,
    default_floor,
    default_scan_step,
    detect_degeneracy,
    refine_root,
    solve_generic,
    solve_spectrum,
)


def energies(levels):
    return [e.energy for e in levels]


def reduced(name, p):
    return lambda E: reduced_characteristic(E, p, name)


def reduced_df(name, p):
    return lambda E: reduced_characteristic(E, p, name, with_derivative=True)[1]


def test_bracket_scan_dirichlet():
    p = StarkProblem(1.0, 1.0)
    req = SpectrumRequest(p, "dirichlet", window=(0.0, 45.0))
    br = bracket_scan(req, reduced("dirichlet", p))
    assert len(br) == 4
    for (a, b), E in zip(br, [2.4498, 9.8748, 22.2097, 39.4803]):
        assert a <= E <= b and b - a <= req.scan_step + 1e-12


def test_bracket_scan_empty_window():
    p = StarkProblem(1.0, 1.0)
    req = SpectrumRequest(p, "dirichlet", window=(100.0, 100.1))
    assert bracket_scan(req, reduced("dirichlet", p)) == []


def test_bracket_scan_negative_neumann_level():
    p = StarkProblem(1.0, 5.0)
    req = SpectrumRequest(p, "neumann", window=(-3.0, 0.0))
    br = bracket_scan(req, reduced("neumann", p))
    assert len(br) == 1 and br[0][0] <= -2.0330 <= br[0][1]


def test_bracket_scan_reports_exact_grid_zero():
    req = SpectrumRequest(StarkProblem(1.0, 1.0), "dirichlet", window=(0.0, 2.0), scan_step=0.5)
    assert bracket_scan(req, lambda E: E - 1.0) == [(1.0, 1.0)]


def test_scan_step_default():
    assert default_scan_step(StarkProblem(1.0, 1.0)) == 0.5
    assert default_scan_step(StarkProblem(4.0, 1.0)) == pytest.approx(math.pi ** 2 / 128)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(window=(1.0, 1.0)),
        dict(window=(2.0, 1.0)),
        dict(window=(0.0, math.inf)),
        dict(count=0),
        dict(window=(0.0, 1.0), scan_step=0.0),
        dict(),
    ],
)
def test_invalid_requests(kwargs):
    with pytest.raises(ValueError):
        SpectrumRequest(StarkProblem(1.0, 1.0), "dirichlet", **kwargs)


def test_refine_root_dirichlet():
    p = StarkProblem(1.0, 1.0)
    ev = refine_root((2.0, 3.0), reduced("dirichlet", p), reduced_df("dirichlet", p))
    assert abs(ev.energy - 2.4498) <= 5e-5
    assert ev.bracket[1] - ev.bracket[0] <= 1e-10
    assert ev.bracket[0] <= ev.energy <= ev.bracket[1]


def test_refine_root_dirichlet_against_collocation():
    p = StarkProblem(1.0, 1.0)
    want = collocation_spectrum(1.0, 1.0, np.eye(2), count=1)[0]
    ev = refine_root((2.0, 3.0), reduced("dirichlet", p), reduced_df("dirichlet", p))
    assert abs(ev.energy - want) <= 1e-9


def test_refine_root_free_path():
    p = StarkProblem(1.0, 1e-12)
    ev = refine_root((2.0, 3.0), reduced("dirichlet", p), reduced_df("dirichlet", p))
    assert abs(ev.energy - math.pi ** 2 / 4) <= 1e-8


def test_refine_root_mixed():
    p = StarkProblem(1.0, 1.0)
    ev = refine_root((0.5, 1.5), reduced("mixed", p), reduced_df("mixed", p))
    assert abs(ev.energy - 0.9864) <= 5e-5


def test_refine_root_rejects_bracket_without_sign_change():
    with pytest.raises(ValueError):
        refine_root((0.0, 1.0), lambda x: x + 1.0, lambda x: 1.0)


def test_refine_root_reports_jump_as_non_convergence():
    # a sign change that is not a root must never be accepted
    with pytest.raises(ConvergenceError) as info:
        refine_root((0.0, 1.0), lambda x: 1.0 if x > 0.3 else -1.0, lambda x: 0.0)
    a, b = info.value.bracket
    assert a <= 0.3 <= b


def test_refine_root_survives_misleading_derivative():
    ev = refine_root((0.0, 3.0), lambda x: x ** 3 - 2.0, lambda x: 1e-3)
    assert ev.energy == pytest.approx(2 ** (1 / 3), abs=1e-10)


@pytest.mark.parametrize(
    "case,L,F,count,expected,tol",
    [
        ("dirichlet", 2.0, 1.0, 4, [0.3554, 2.5324, 5.6007, 9.9001], 5e-4),
        ("neumann", 4.0, 1.0, 4, [-2.9812, -0.7518, 0.8199, 2.1551], 5e-4),
        ("periodic", 1.0, 0.01, 5, [0.0, 9.86796, 9.87119, 39.4778, 39.47891], 5e-3),
    ],
)
def test_solve_spectrum_examples(case, L, F, count, expected, tol):
    got = solve_spectrum(SpectrumRequest(StarkProblem(L, F), case, count=count))
    assert len(got) == count
    assert np.max(np.abs(np.array(energies(got)) - expected)) <= tol


def test_solve_spectrum_postconditions():
    got = solve_spectrum(SpectrumRequest(StarkProblem(1.0, 0.01), "periodic", count=9))
    e = energies(got)
    assert e == sorted(e)
    assert all(x.residual <= 1e-8 for x in got)
    brackets = sorted(x.bracket for x in got)
    assert all(b1[1] < b2[0] for b1, b2 in zip(brackets, brackets[1:]))


def test_window_mode_and_edges():
    p = StarkProblem(1.0, 1.0)
    full = solve_spectrum(SpectrumRequest(p, "dirichlet", window=(0.0, 45.0)))
    assert len(full) == 4
    E2 = full[1].energy
    # a window ending on an eigenvalue includes it once
    edge = solve_spectrum(SpectrumRequest(p, "dirichlet", window=(0.0, E2)))
    assert len(edge) == 2 and edge[-1].energy == pytest.approx(E2, abs=1e-10)
    nxt = solve_spectrum(SpectrumRequest(p, "dirichlet", window=(E2, 30.0)))
    assert nxt[0].energy == pytest.approx(E2, abs=1e-10)


def test_count_mode_expands_window():
    got = solve_spectrum(SpectrumRequest(StarkProblem(1.0, 1.0), "dirichlet", count=12))
    assert len(got) == 12
    assert got[-1].energy == pytest.approx((12 * math.pi / 2) ** 2, rel=1e-2)


def test_count_with_window_starts_at_window():
    got = solve_spectrum(SpectrumRequest(StarkProblem(1.0, 1.0), "dirichlet", window=(5.0, 6.0), count=2))
    assert energies(got) == pytest.approx([9.87481776, 22.2097281], abs=1e-7)


def test_degeneracy():
    p0 = StarkProblem(1.0, 0.0)
    assert detect_degeneracy(math.pi ** 2, SpectrumRequest(p0, "periodic", count=1)) == 2
    p = StarkProblem(1.0, 0.01)
    split = solve_spectrum(SpectrumRequest(p, "periodic", count=3))
    assert detect_degeneracy(split[1].energy, SpectrumRequest(p, "periodic", count=1)) == 1
    for L, F in [(1.0, 1.0), (3.0, 0.0), (2.0, 0.01)]:
        req = SpectrumRequest(StarkProblem(L, F), "dirichlet", count=5)
        assert all(detect_degeneracy(e.energy, req) == 1 for e in solve_spectrum(req))


def test_free_periodic_levels_are_double():
    got = solve_spectrum(SpectrumRequest(StarkProblem(1.0, 0.0), "periodic", count=4))
    assert got[0].multiplicity == 1 and abs(got[0].energy) <= 1e-10
    for n, ev in enumerate(got[1:], start=1):
        assert ev.multiplicity == 2
        assert ev.energy == pytest.approx((n * math.pi) ** 2, abs=1e-9)


def test_monotone_in_length():
    e1 = [solve_spectrum(SpectrumRequest(StarkProblem(L, 1.0), "dirichlet", count=1))[0].energy for L in (1, 2, 3, 4)]
    assert e1[0] > e1[1] > e1[2] > e1[3]


def test_splitting_brackets_free_level():
    got = solve_spectrum(SpectrumRequest(StarkProblem(1.0, 0.01), "periodic", count=3))
    assert got[1].energy < math.pi ** 2 < got[2].energy


@pytest.mark.parametrize("case", ["dirichlet", "neumann", "mixed", "periodic"])
def test_free_limit(case):
    analytic = {
        "dirichlet": [(n * math.pi / 2) ** 2 for n in range(1, 6)],
        "neumann": [(n * math.pi / 2) ** 2 for n in range(0, 5)],
        "mixed": [((2 * n - 1) * math.pi / 4) ** 2 for n in range(1, 6)],
        "periodic": [0.0, math.pi ** 2, math.pi ** 2, 4 * math.pi ** 2, 4 * math.pi ** 2],
    }[case]
    got = solve_spectrum(SpectrumRequest(StarkProblem(1.0, 1e-8), case, count=5))
    # pairs split by ~F are reported as one level of multiplicity 2
    flat = [e.energy for e in got for _ in range(e.multiplicity)][:5]
    assert np.max(np.abs(np.array(flat) - analytic)) <= 1e-4


@pytest.mark.parametrize("case", ["dirichlet", "neumann", "mixed", "periodic"])
@pytest.mark.parametrize("L,F", [(1.0, 1.0), (1.0, 5.0), (2.0, 0.1), (1.0, 0.01)])
def test_generic_path_matches_presets(case, L, F):
    p = StarkProblem(L, F)
    a = solve_spectrum(SpectrumRequest(p, case, count=6))
    b = solve_generic(SpectrumRequest(p, UnitaryBC(preset(case).matrix), count=6))
    assert np.max(np.abs(np.array(energies(a)) - energies(b))) <= 1e-6


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("L,F", [(1.0, 1.0), (2.0, 0.1), (1.0, 0.01), (1.5, 5.0), (1.0, 0.0)])
def test_generic_against_collocation(seed, L, F):
    U = unitary_group.rvs(2, random_state=np.random.default_rng(seed))
    want = collocation_spectrum(L, F, U)
    got = solve_spectrum(SpectrumRequest(StarkProblem(L, F), UnitaryBC(U), count=6))
    assert np.max(np.abs(np.array(energies(got)) - want) / (1 + np.abs(want))) <= 1e-8


@pytest.mark.parametrize("theta,L,F", [(0.05, 1.0, 1.0), (0.05, 1.0, 1e-6), (0.3, 2.0, 0.01)])
def test_deep_boundary_states(theta, L, F):
    U = np.diag([np.exp(1j * theta), np.exp(0.7j * theta)])
    bc = UnitaryBC(U)
    assert default_floor(StarkProblem(L, F), bc) < -F * L - 20
    want = collocation_spectrum(L, F, U, n=200, count=4)
    got = solve_spectrum(SpectrumRequest(StarkProblem(L, F), bc, count=4))
    assert np.max(np.abs(np.array(energies(got)) - want) / (1 + np.abs(want))) <= 1e-8


def test_generic_split_pair():
    tau1 = make_unitary(math.pi / 2, 0, -1j)
    got = solve_generic(SpectrumRequest(StarkProblem(1.0, 0.01), tau1, count=5))
    assert energies(got)[1:3] == pytest.approx([9.86796, 9.87119], abs=5e-3)
    assert got[2].energy - got[1].energy == pytest.approx(3.23e-3, rel=0.2)


def test_eigenvalue_is_plain_record():
    ev = Eigenvalue(1.0, 0.0, 1, (0.5, 1.5))
    assert ev.multiplicity == 1 and ev.bracket == (0.5, 1.5)
