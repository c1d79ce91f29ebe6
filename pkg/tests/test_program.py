import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from physbound.dual.bound import schur_block
from physbound.dual.lagrangian import (
    DualMode,
    DualPoint,
    assemble_quadratic,
    random_dual_point,
)
from physbound.dual.program import build_dual_sdp, smat, svec, svec_basis, svec_size


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 6))
def test_svec_preserves_inner_products(seed, k):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((k, k))
    b = rng.standard_normal((k, k))
    a, b = a + a.T, b + b.T
    assert svec(a).size == svec_size(k)
    assert svec(a) @ svec(b) == pytest.approx(np.trace(a @ b), rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(smat(svec(a), k), a, atol=1e-14)


def test_svec_order_and_basis():
    a = np.array([[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_allclose(svec(a), [1.0, 2.0 * np.sqrt(2.0), 3.0])
    basis = svec_basis(2)
    np.testing.assert_allclose(sum(x * e for x, e in zip(svec(a), basis)), a)


def test_scalar_program_layout(scalar):
    problem, ps, obj = scalar
    prog = build_dual_sdp(problem, ps, obj, DualMode.INTERVAL_PSD)
    assert prog.nvar == 2
    assert [blk.name for blk in prog.blocks] == ["N_1", "nu", "s"]
    assert prog.block("nu").size == 0
    assert [lmi.order for lmi in prog.lmis] == [2, 1]
    np.testing.assert_allclose(prog.objective, [1.0, -1.0])
    assert prog.objective_offset == 0.0
    schur = prog.lmis[0]
    np.testing.assert_allclose(schur.offset, [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(schur.coeffs[0], [[0.75, -1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(schur.coeffs[1], [[0.0, 0.0], [0.0, 1.0]])


def test_boolean_program_has_no_block_constraints(multi):
    problem, ps, obj = multi
    interval = build_dual_sdp(problem, ps, obj, DualMode.INTERVAL_PSD)
    boolean = build_dual_sdp(problem, ps, obj, DualMode.BOOLEAN_SYMMETRIC)
    assert [lmi.name for lmi in interval.lmis] == ["schur", "N_1", "N_2"]
    assert [lmi.name for lmi in boolean.lmis] == ["schur"]
    assert interval.nvar == boolean.nvar == 3 + 3 + 2 + 1


@pytest.mark.parametrize("mode", list(DualMode))
def test_program_is_the_schur_form_of_the_lagrangian(multi, rng, mode):
    problem, ps, obj = multi
    prog = build_dual_sdp(problem, ps, obj, mode)
    for _ in range(10):
        dp = random_dual_point(ps, rng, mode)
        s = float(rng.standard_normal())
        x = prog.encode(dp, s)
        coeffs = assemble_quadratic(dp, problem, ps, obj)
        np.testing.assert_allclose(prog.lmis[0].evaluate(x), schur_block(coeffs, s), atol=1e-10)
        assert prog.objective_value(x) == pytest.approx(coeffs.v_hat - s, rel=1e-12, abs=1e-12)
        decoded, s_back = prog.decode(x)
        assert s_back == s
        for a, b in zip(decoded.n_blocks, dp.n_blocks):
            np.testing.assert_allclose(a, b, atol=1e-14)
        np.testing.assert_allclose(decoded.nu, dp.nu)


def test_zero_point_with_large_s_is_feasible(multi):
    problem, ps, obj = multi
    prog = build_dual_sdp(problem, ps, obj)
    x = prog.encode(DualPoint.zeros(ps), 1e6)
    for lmi in prog.lmis:
        assert np.linalg.eigvalsh(lmi.evaluate(x))[0] >= -1e-9


def test_sdpa_export(scalar):
    problem, ps, obj = scalar
    text = build_dual_sdp(problem, ps, obj).to_sdpa()
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("*")]
    body = [ln for ln in lines if not ln.startswith("*")]
    assert any("objective_offset 0.0" in ln for ln in comments)
    assert body[0] == "2 = mDIM"
    assert body[1] == "2 = nBLOCK"
    assert body[2] == "2 1 = bLOCKsTRUCT"
    assert [float(v) for v in body[3].split()] == [-1.0, 1.0]
    entries = {tuple(ln.split()[:4]): float(ln.split()[4]) for ln in body[4:]}
    # F0 is the negated offset: Q = 1 at (1, 1) of block 1
    assert entries[("0", "1", "1", "1")] == -1.0
    assert entries[("1", "1", "1", "2")] == -1.0
    assert entries[("1", "2", "1", "1")] == 1.0
    assert entries[("2", "1", "2", "2")] == 1.0
