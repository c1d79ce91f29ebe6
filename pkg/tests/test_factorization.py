import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from physbound.errors import DimensionError, FactorizationError
from physbound.problem.factorization import (
    factor_term,
    pivoted_rank,
    reconstruction_error,
    stack_terms,
)
from physbound.problem.models import FactoredTerm


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    m=st.integers(2, 8),
    n=st.integers(2, 8),
    k=st.integers(1, 2),
)
def test_factor_term_recovers_rank_and_matrix(seed, m, n, k):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, k)) @ rng.standard_normal((k, n))
    term = factor_term(a)
    assert term.rank == k
    np.testing.assert_allclose(term.u.T @ term.u, np.eye(k), atol=1e-12)
    assert reconstruction_error(term, a) <= 1e-10 * np.linalg.norm(a, 2)


def test_factor_term_rank_one_diagonal():
    term = factor_term(np.diag([0.0, 0.5, 0.0]))
    assert term.rank == 1
    np.testing.assert_allclose(term.dense(), np.diag([0.0, 0.5, 0.0]), atol=1e-15)


def test_factor_term_rejects_zero():
    with pytest.raises(FactorizationError):
        factor_term(np.zeros((3, 3)))


def test_stack_terms_offsets_and_rank(rank_one_instance):
    stacked = stack_terms(rank_one_instance.problem.terms)
    assert stacked.u.shape == (5, 3)
    assert stacked.block_offsets == ((0, 1), (1, 2), (2, 3))
    assert stacked.full_column_rank
    np.testing.assert_array_equal(stacked.block(2), rank_one_instance.problem.terms[1].u)


def test_stack_terms_detects_shared_columns():
    u = np.array([[1.0], [0.0], [0.0]])
    terms = (FactoredTerm(u=u, v=u), FactoredTerm(u=2.0 * u, v=u))
    stacked = stack_terms(terms)
    assert stacked.rank == 1
    assert not stacked.full_column_rank


def test_stack_terms_detects_too_many_columns():
    terms = tuple(FactoredTerm(u=np.eye(2)[:, [i % 2]], v=np.ones((2, 1))) for i in range(3))
    assert not stack_terms(terms).full_column_rank


def test_stack_terms_row_mismatch():
    terms = (
        FactoredTerm(u=np.ones((3, 1)), v=np.ones((3, 1))),
        FactoredTerm(u=np.ones((2, 1)), v=np.ones((3, 1))),
    )
    with pytest.raises(DimensionError):
        stack_terms(terms)


def test_pivoted_rank():
    assert pivoted_rank(np.zeros((3, 2))) == 0
    assert pivoted_rank(np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 1e-14]])) == 1
    assert pivoted_rank(np.eye(3)[:, :2]) == 2


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 3))
def test_stacked_u_spans_the_term_column_spaces(seed, d):
    rng = np.random.default_rng(seed)
    m, n = 9, 5
    dense = [rng.standard_normal((m, 2)) @ rng.standard_normal((2, n)) for _ in range(d)]
    stacked = stack_terms(tuple(factor_term(a) for a in dense))
    assert stacked.full_column_rank
    ours = sla.orth(stacked.u)
    theirs = sla.orth(np.hstack(dense))
    assert ours.shape[1] == theirs.shape[1] == 2 * d
    # each basis lies in the span of the other
    assert np.linalg.norm(ours - theirs @ (theirs.T @ ours)) <= 1e-10
    assert np.linalg.norm(theirs - ours @ (ours.T @ theirs)) <= 1e-10
