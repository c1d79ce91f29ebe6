"""End-to-end properties over batches of seeded instances."""
import numpy as np
import pytest

from conftest import SCALAR_OPTIMUM, instance
from physbound.assets.generate import InstanceKind
from physbound.dual.bound import solve_bound
from physbound.dual.lagrangian import DualMode, eval_dual
from physbound.oracle.enumeration import brute_force_boolean, grid_search_interval, verify_weak_duality
from physbound.problem.models import Domain
from physbound.problem.physics import assemble_physics, solve_field
from physbound.projectors.construction import construct_projectors
from physbound.projectors.models import ProjectorMethod
from physbound.sets.membership import (
    determined_mask,
    membership_tolerance,
    recover_theta,
    s_violation,
)

KINDS = list(InstanceKind)


def _batch(count: int, max_m: int, max_d: int, seed: int, **kwargs):
    rng = np.random.default_rng(seed)
    for k in range(count):
        kind = KINDS[k % len(KINDS)]
        d = int(rng.integers(1, max_d + 1))
        m = int(rng.integers(d, max_m + 1))
        yield instance(kind.value, m, d, seed=int(rng.integers(2**31)), **kwargs)


def test_inverse_completion_residuals():
    for inst in _batch(100, 20, 5, seed=1):
        ps = construct_projectors(inst.problem)
        assert ps.residuals.worst() <= 1e-10


def test_tightness_round_trip(rng):
    checked = 0
    for inst in _batch(40, 10, 4, seed=2):
        problem = inst.problem
        ps = construct_projectors(problem)
        for _ in range(5):
            theta = rng.uniform(-1.0, 1.0, problem.d)
            z = solve_field(problem, theta).z
            assert s_violation(z, problem, ps).is_member(membership_tolerance(problem, z))
            rec = recover_theta(z, problem, ps)
            mask = determined_mask(z, problem, ps)
            np.testing.assert_allclose(rec.theta[mask], theta[mask], atol=1e-8)
            residual = np.linalg.norm(assemble_physics(problem, rec.theta) @ z - problem.b)
            assert residual <= 1e-8 * (1.0 + np.linalg.norm(problem.b))
            checked += 1
    assert checked == 200


@pytest.mark.solver
def test_weak_duality_boolean():
    for inst in _batch(50, 10, 4, seed=3, domain=Domain.BOOLEAN):
        problem, obj = inst.problem, inst.objective
        ps = construct_projectors(problem)
        report = solve_bound(problem, ps, obj)
        oracle = brute_force_boolean(problem, obj)
        assert verify_weak_duality(report, oracle).passed
        g = eval_dual(report.dual_point, problem, ps, obj)
        assert abs(g - report.d_star) <= 1e-5 * (1.0 + abs(report.d_star))


@pytest.mark.solver
def test_weak_duality_interval():
    for inst in _batch(20, 8, 2, seed=4):
        problem, obj = inst.problem, inst.objective
        ps = construct_projectors(problem)
        report = solve_bound(problem, ps, obj)
        grid = grid_search_interval(problem, obj, 101)
        assert report.d_star <= grid.p_star + 1e-6 * (1.0 + abs(grid.p_star))


@pytest.mark.solver
def test_scalar_tight_case(scalar):
    problem, ps, obj = scalar
    assert solve_bound(problem, ps, obj).d_star == pytest.approx(SCALAR_OPTIMUM, abs=1e-4)
    assert grid_search_interval(problem, obj, 101).p_star == pytest.approx(SCALAR_OPTIMUM, abs=1e-12)


@pytest.mark.solver
def test_mode_ordering():
    for inst in _batch(20, 8, 3, seed=5):
        problem, obj = inst.problem, inst.objective
        ps = construct_projectors(problem)
        interval = solve_bound(problem, ps, obj, DualMode.INTERVAL_PSD)
        boolean = solve_bound(problem, ps, obj, DualMode.BOOLEAN_SYMMETRIC)
        assert boolean.d_star >= interval.d_star - 1e-6


@pytest.mark.solver
def test_method_equivalence():
    checked = 0
    for seed in range(5):
        for kind, kwargs in (("multi_scenario_diag", {"block_size": 2}), ("helmholtz_1d", {})):
            inst = instance(kind, 6, 2, seed=seed, **kwargs)
            problem, obj = inst.problem, inst.objective
            qr = construct_projectors(problem, ProjectorMethod.QR_SHORTCUT)
            assert qr.verified
            inverse = construct_projectors(problem)
            d_qr = solve_bound(problem, qr, obj).d_star
            d_inv = solve_bound(problem, inverse, obj).d_star
            assert d_qr == pytest.approx(d_inv, abs=1e-6 * (1.0 + abs(d_inv)))
            checked += 1
    assert checked == 10
    rank_one = instance("rank_one_loads", 6, 3, seed=0).problem
    assert not construct_projectors(rank_one, ProjectorMethod.QR_SHORTCUT).verified
