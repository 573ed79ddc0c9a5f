"""Entropy, mutual information, and the common-information search."""

import numpy as np
import pytest

from statehelper import (
    CommonInfoSearch,
    ContractViolationError,
    JointDistribution,
    binary_entropy,
    conditional_mutual_information,
    entropy,
    inverse_binary_entropy,
    mutual_information,
    wyner_common_information,
)

from conftest import make_erasure_game, make_optimal_erasure_scheme, random_joint


def test_entropy_anchors():
    assert entropy([1.0]) == 0.0
    assert abs(entropy([0.5, 0.5]) - 1.0) < 1e-12
    assert abs(entropy([0.25] * 4) - 2.0) < 1e-12
    assert abs(entropy([0.5, 0.25, 0.25]) - 1.5) < 1e-12


def test_binary_entropy_anchors():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert abs(binary_entropy(0.5) - 1.0) < 1e-12
    assert abs(binary_entropy(0.25) - 0.8112781244591328) < 1e-12
    with pytest.raises(ContractViolationError):
        binary_entropy(1.2)


def test_inverse_binary_entropy_round_trip():
    # near p = 1/2 the entropy curve is flat, so compare entropies there
    for p in np.linspace(0.0, 0.5, 26):
        q = inverse_binary_entropy(binary_entropy(p))
        assert abs(binary_entropy(q) - binary_entropy(p)) < 1e-9
        assert abs(q - p) < 1e-6
    assert abs(inverse_binary_entropy(1.0) - 0.5) < 1e-6
    assert inverse_binary_entropy(0.0) < 1e-9


def test_mutual_information_anchors():
    independent = JointDistribution(np.outer([0.3, 0.7], [0.5, 0.5]))
    assert mutual_information(independent, (0,), (1,)) == 0.0
    correlated = JointDistribution(np.diag([0.5, 0.5]))
    assert abs(mutual_information(correlated, (0,), (1,)) - 1.0) < 1e-12
    # I(S;A) of the erasure game's optimal scheme is 1/4 bit
    joint = make_optimal_erasure_scheme().joint(np.array([0.5, 0.5]))
    sa = JointDistribution(joint.marginal((0, 2)))
    assert abs(mutual_information(sa, (0,), (1,)) - 0.25) < 1e-12


def test_conditional_mutual_information_markov_chain():
    # S - U - A Markov means I(S;A|U) = 0
    scheme = make_optimal_erasure_scheme()
    joint = scheme.joint(np.array([0.5, 0.5]))
    assert conditional_mutual_information(joint, (0,), (2,), (1,)) < 1e-12
    # and I(U;A|S) for the same scheme is H(1/4) - 1/2
    value = conditional_mutual_information(joint, (1,), (2,), (0,))
    assert abs(value - (binary_entropy(0.25) - 0.5)) < 1e-12


def test_grouping_must_cover_axes():
    joint = JointDistribution(np.full((2, 2), 0.25))
    with pytest.raises(ContractViolationError):
        mutual_information(joint, (0,), (0, 1))


def test_chain_rule_identity():
    rng = np.random.default_rng(23)
    for _ in range(40):
        joint = JointDistribution(random_joint(rng, (2, 3, 2)))
        lhs = mutual_information(joint, (0,), (1, 2))
        rhs = (mutual_information(JointDistribution(joint.marginal((0, 1))),
                                  (0,), (1,))
               + conditional_mutual_information(joint, (0,), (2,), (1,)))
        assert abs(lhs - rhs) < 1e-9


def test_entropy_invariant_under_relabeling():
    rng = np.random.default_rng(29)
    for _ in range(20):
        p = rng.dirichlet(np.ones(5))
        assert abs(entropy(p) - entropy(p[rng.permutation(5)])) < 1e-12


def test_entropy_concavity():
    rng = np.random.default_rng(31)
    for _ in range(20):
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        lam = rng.uniform()
        mixed = lam * p + (1 - lam) * q
        assert entropy(mixed) >= lam * entropy(p) + (1 - lam) * entropy(q) - 1e-12


def test_common_information_product_joint():
    joint = JointDistribution(np.outer([0.4, 0.6], [0.3, 0.7]))
    result = wyner_common_information(joint, 2, CommonInfoSearch(restarts=12))
    assert result.value < 1e-6
    assert result.achieved_joint_error <= 1e-6


def test_common_information_perfect_correlation():
    joint = JointDistribution(np.diag([0.5, 0.5]))
    result = wyner_common_information(joint, 2, CommonInfoSearch(restarts=12))
    assert abs(result.value - 1.0) < 1e-6


def test_common_information_sandwich_on_erasure_joint():
    game = make_erasure_game()
    scheme = make_optimal_erasure_scheme()
    sa = JointDistribution(scheme.joint(game.prior).marginal((0, 2)))
    result = wyner_common_information(sa, 3, CommonInfoSearch(restarts=30))
    i_sa = mutual_information(sa, (0,), (1,))
    h_s = entropy(sa.mass.sum(axis=1))
    h_a = entropy(sa.mass.sum(axis=0))
    assert i_sa - 1e-9 <= result.value <= min(h_s, h_a) + 1e-9
    assert result.aux_cardinality == 3
    # the decomposition must reproduce the target joint
    recon = np.einsum("u,us,ua->sa", result.p_u, result.p_s_given_u.rows,
                      result.p_a_given_u.rows)
    assert 0.5 * np.abs(recon - sa.mass).sum() <= 1e-6


def test_common_information_rejects_bad_shapes():
    joint = JointDistribution(np.full((2, 2, 2), 0.125))
    with pytest.raises(ContractViolationError):
        wyner_common_information(joint, 2)
