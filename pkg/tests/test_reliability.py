import numpy as np
import pytest

from conftest import (
    all_failure_masks,
    full_instance,
    random_feasible_solution,
    random_instance,
)
from nfvrel.errors import EnumerationLimitExceeded
from nfvrel.model import ChainComposition, Embedding, FailureModel, FailureVector
from nfvrel.reliability import (
    Method,
    ReliabilityResult,
    exact_reliability,
    failure_vector_prob,
    monte_carlo_reliability,
    rvnf_executed,
    surrogate_objective,
)


class TestFailureVectorProb:
    def test_both_on(self):
        # (1 - 0.1) * (1 - 0.1) = 0.81
        f = FailureVector([1, 1])
        assert failure_vector_prob(f, FailureModel([0.1, 0.1])) == pytest.approx(0.81, abs=1e-12)

    def test_mixed(self):
        # server 0 off (prob 0.3) * server 1 on (prob 0.8) = 0.24
        f = FailureVector([0, 1])
        assert failure_vector_prob(f, FailureModel([0.3, 0.2])) == pytest.approx(0.24, abs=1e-12)

    def test_sums_to_one(self):
        fm = FailureModel([0.15, 0.3, 0.07])
        total = sum(failure_vector_prob(FailureVector.from_mask(m, 3), fm)
                    for m in all_failure_masks(3))
        assert total == pytest.approx(1.0, abs=1e-12)


class TestRvnfExecuted:
    def test_single_pair_truth_table(self, pair_instance):
        inst, cc, emb = pair_instance
        # the sole supporting pair is (server 0 hosting the CVNF, server 1
        # hosting the RVNF): execution requires both on
        for mask in all_failure_masks(2):
            f = FailureVector.from_mask(mask, 2)
            assert rvnf_executed(0, f, cc, emb, inst.topology) == (mask == 0b11)


class TestExactReliability:
    def test_single_pair(self, pair_instance):
        inst, cc, emb = pair_instance
        res = exact_reliability(inst, cc, emb)
        assert res.method is Method.EXACT_ENUMERATION
        assert res.value == pytest.approx(0.81, abs=1e-12)

    def test_fully_replicated(self, pair_instance):
        # both VNFs on both servers: success iff any server on, 1 - 0.1^2
        inst, cc, _ = pair_instance
        emb = Embedding(x_c=[[1, 1]], x_r=[[1, 1]])
        assert exact_reliability(inst, cc, emb).value == pytest.approx(0.99, abs=1e-12)

    def test_uninstantiated_rvnf_gives_zero(self):
        inst = full_instance(2, 0.1)
        cc = ChainComposition([0])
        emb = Embedding(x_c=[[1, 1]], x_r=[[0, 0]])
        assert exact_reliability(inst, cc, emb).value == 0.0

    def test_enumeration_limit(self, pair_instance):
        inst, cc, emb = pair_instance
        with pytest.raises(EnumerationLimitExceeded):
            exact_reliability(inst, cc, emb, enumeration_limit=1)

    def test_matches_scalar_oracle(self):
        """Cross-check the kernel against a direct per-vector evaluation built
        on rvnf_executed and failure_vector_prob."""
        rng = np.random.default_rng(7)
        for _ in range(10):
            inst = random_instance(rng, n_s=3, n_cvnf=1, n_rvnf=2)
            cc, emb = random_feasible_solution(inst, rng)
            expected = 0.0
            for mask in all_failure_masks(inst.n_servers):
                f = FailureVector.from_mask(mask, inst.n_servers)
                if all(rvnf_executed(v, f, cc, emb, inst.topology)
                       for v in range(inst.logical.n_rvnf)):
                    expected += failure_vector_prob(f, inst.failures)
            got = exact_reliability(inst, cc, emb).value
            assert got == pytest.approx(expected, abs=1e-12)


class TestMonteCarlo:
    def test_brackets_exact(self, pair_instance):
        inst, cc, emb = pair_instance
        res = monte_carlo_reliability(inst, cc, emb, 100_000, seed=0)
        assert res.method is Method.MONTE_CARLO
        assert res.n_samples == 100_000
        assert abs(res.value - 0.81) <= 3.0 * res.stderr

    def test_deterministic_for_fixed_seed(self, pair_instance):
        inst, cc, emb = pair_instance
        a = monte_carlo_reliability(inst, cc, emb, 70_001, seed=42)
        b = monte_carlo_reliability(inst, cc, emb, 70_001, seed=42)
        assert a.value == b.value

    def test_seed_changes_estimate(self, pair_instance):
        inst, cc, emb = pair_instance
        a = monte_carlo_reliability(inst, cc, emb, 10_000, seed=1)
        b = monte_carlo_reliability(inst, cc, emb, 10_000, seed=2)
        assert a.value != b.value

    def test_rejects_nonpositive_samples(self, pair_instance):
        inst, cc, emb = pair_instance
        with pytest.raises(ValueError):
            monte_carlo_reliability(inst, cc, emb, 0, seed=0)


class TestSurrogate:
    def test_equals_exact_for_single_pair(self, pair_instance):
        # with one RVNF and one candidate pair, psi is 0 or 1, so the hinge
        # equals the success indicator
        inst, cc, emb = pair_instance
        assert surrogate_objective(inst, cc, emb) == pytest.approx(0.81, abs=1e-12)

    def test_hinge_caps_surplus_pairs(self, pair_instance):
        # fully replicated single RVNF: psi = (#on)^2 but the hinge caps each
        # term at 1, so the surrogate equals the exact value 0.99
        inst, cc, _ = pair_instance
        emb = Embedding(x_c=[[1, 1]], x_r=[[1, 1]])
        assert surrogate_objective(inst, cc, emb) == pytest.approx(0.99, abs=1e-12)

    def test_negative_for_empty_embedding(self):
        inst = full_instance(2, 0.1, n_cvnf=1, n_rvnf=3, load_budget=3)
        cc = ChainComposition([0, 0, 0])
        emb = Embedding(x_c=np.zeros((1, 2)), x_r=np.zeros((3, 2)))
        # psi = 0 everywhere: surrogate = 1 - n_rvnf = -2
        assert surrogate_objective(inst, cc, emb) == pytest.approx(-2.0, abs=1e-12)


class TestReliabilityResult:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ReliabilityResult(value=1.5, method=Method.EXACT_ENUMERATION)

    def test_stderr_consistency(self):
        with pytest.raises(ValueError):
            ReliabilityResult(value=0.5, method=Method.EXACT_ENUMERATION, stderr=0.1)
        with pytest.raises(ValueError):
            ReliabilityResult(value=0.5, method=Method.MONTE_CARLO)
