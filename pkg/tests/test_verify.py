"""Tests for the inequality checks behind the Verifier facade."""

import math

import numpy as np
import pytest

from qchain.core.channel_div import SearchOptions
from qchain.core.divergence import DivergenceKind, MeasuredOptions, RenyiOrder
from qchain.core.errors import (
    ConfigError,
    NonCommutingInputs,
    NonUnitalCandidate,
    OrderOutOfRange,
    SupportViolation,
    UnsupportedMap,
)
from qchain.core.quantum import (
    DensityOperator,
    PositiveMapRep,
    basis_state,
    depolarizing_map,
    diagonal_state,
    identity_map,
    random_channel,
    random_full_rank_state,
    random_state,
    random_unital_channel,
    random_unitary,
    transpose_map,
)
from qchain.core.verify import CheckResult, Verifier, compute_slack, run_check
from qchain.core.verify.chain import add_bits

TWO = RenyiOrder.finite(2.0)
INF = RenyiOrder.infinity()


@pytest.fixture
def verifier():
    return Verifier(
        search=SearchOptions(restarts=1, refine_iters=0),
        measured_opts=MeasuredOptions(restarts=1, refine_iters=0),
    )


@pytest.fixture
def instance(rng):
    """Random qubit pair and a pair of random channels."""
    return {
        "rho": random_state(2, seed=rng),
        "sigma": random_full_rank_state(2, seed=rng),
        "e": random_channel(2, seed=rng),
        "f": random_channel(2, seed=rng),
    }


@pytest.mark.unit
class TestSlackAndResults:
    @pytest.mark.parametrize(
        "lhs,rhs,expected",
        [
            (1.0, 2.0, 1.0),
            (2.0, 1.0, -1.0),
            (math.inf, math.inf, math.inf),
            (math.inf, 3.0, -math.inf),
            (-math.inf, 0.0, math.inf),
            (1.0, -math.inf, -math.inf),
        ],
    )
    def test_compute_slack(self, lhs, rhs, expected):
        assert compute_slack(lhs, rhs) == expected

    def test_add_bits(self):
        assert add_bits(1.0, 2.5) == 3.5
        assert add_bits(1.0, math.inf, -math.inf) == math.inf

    def test_result_alias(self):
        result = CheckResult(name="x", lhs_bits=0.0, rhs_bits=1.0, slack=1.0, passed=True, tol=1e-7)
        payload = result.to_dict()
        assert payload["pass"] is True
        assert "passed" not in payload

    def test_ungated_result_never_fails(self):
        result = CheckResult(name="x", lhs_bits=2.0, rhs_bits=1.0, slack=-1.0, passed=False, tol=1e-7, gated=False)
        assert not result.failed


@pytest.mark.unit
class TestPinchingChecks:
    def test_pinching_inequality(self, verifier, instance):
        result = verifier.check_pinching_inequality(instance["rho"], instance["sigma"])
        assert result.passed
        assert result.details["spec_count"] == 2

    def test_pinching_lemma(self, verifier, instance):
        for order in (RenyiOrder.finite(0.6), TWO, INF):
            result = verifier.check_pinching_lemma(
                instance["e"], instance["f"], instance["rho"], instance["sigma"], order
            )
            assert result.passed, result.to_dict()

    def test_pinching_lemma_positive_map(self, verifier, rng):
        e = random_channel(3, seed=rng).transposed()
        f = random_channel(3, seed=rng).transposed()
        rho, sigma = random_state(3, seed=rng), random_full_rank_state(3, seed=rng)
        assert verifier.check_pinching_lemma(e, f, rho, sigma, TWO).passed

    def test_pinching_lemma_rejects_order_one(self, verifier, instance):
        with pytest.raises(OrderOutOfRange):
            verifier.check_pinching_lemma(
                instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.one()
            )

    def test_spectrum_trend(self, verifier):
        sigma = diagonal_state([0.5, 0.3, 0.2])
        result = verifier.check_spectrum_trend(sigma, TWO)
        assert result.passed
        assert result.details["spec_count_1"] == 3
        assert result.details["spec_count_n"] == 6
        assert result.lhs_bits == pytest.approx(math.log2(6))
        assert result.rhs_bits == pytest.approx(2 * math.log2(3))

    def test_spectrum_trend_fails_without_strict_decrease(self, verifier, mocker):
        mocker.patch("qchain.core.verify.pinching.spectrum_term", side_effect=[1.0, 2.0])
        result = verifier.check_spectrum_trend(diagonal_state([0.5, 0.3, 0.2]), TWO)
        assert result.slack == pytest.approx(0.0)
        assert result.details["strictly_decreasing"] is False
        assert result.failed

    def test_spectrum_trend_single_eigenvalue_is_flat(self, verifier, mixed_qubit):
        result = verifier.check_spectrum_trend(mixed_qubit, INF)
        assert result.lhs_bits == result.rhs_bits == 0.0
        assert result.passed

    @pytest.mark.parametrize("alpha", ["1.5", "4", "inf"])
    def test_spectrum_trend_is_strict_for_generic_sigma(self, verifier, rng, alpha):
        sigma = random_full_rank_state(2, seed=rng)
        result = verifier.check_spectrum_trend(sigma, RenyiOrder.parse(alpha), n=3)
        assert result.details["spec_count_n"] == 4
        assert result.details["strictly_decreasing"] is True
        assert result.passed

    def test_spectrum_trend_needs_order_above_one(self, verifier, mixed_qubit):
        with pytest.raises(OrderOutOfRange):
            verifier.check_spectrum_trend(mixed_qubit, RenyiOrder.finite(0.5))


@pytest.mark.unit
class TestChainRules:
    def test_meta_chain_closed_form(self, verifier, plus_state, mixed_qubit):
        result = verifier.check_meta_chain(identity_map(2), depolarizing_map(2), plus_state, mixed_qubit, TWO)
        assert result.passed
        assert result.lhs_bits == pytest.approx(1.0)
        assert result.details["input_term"] == pytest.approx(1.0)
        assert result.details["channel_term"] == pytest.approx(1.0)
        assert result.rhs_bits == pytest.approx(2.0)
        assert result.slack == pytest.approx(result.details["proof_slack"])
        assert result.details["statement_slack"] >= 0.0

    def test_meta_chain_gates_on_statement_form(self, verifier, plus_state, mixed_qubit, mocker):
        mocker.patch("qchain.core.verify.chain.channel_divergence", return_value=mocker.Mock(value_bits=-10.0))
        result = verifier.check_meta_chain(identity_map(2), depolarizing_map(2), plus_state, mixed_qubit, TWO)
        assert result.slack == pytest.approx(1.0)
        assert result.details["statement_slack"] == pytest.approx(-10.0)
        assert result.failed

    @pytest.mark.parametrize("alpha", ["0.6", "1", "2", "inf"])
    def test_meta_chain_sandwiched(self, verifier, instance, alpha):
        result = verifier.check_meta_chain(
            instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.parse(alpha)
        )
        assert result.name == "meta_chain_sandwiched"
        assert result.passed, result.to_dict()

    def test_geometric_chain(self, verifier, instance):
        result = verifier.check_geometric_chain(
            instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.finite(1.5)
        )
        assert result.name == "geometric_chain"
        assert result.details["stabilization_used"] is False
        assert result.passed

    def test_geometric_chain_above_two_only_explores(self, verifier, instance):
        args = (instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.finite(4.0))
        with pytest.raises(OrderOutOfRange):
            verifier.check_geometric_chain(*args)
        result = verifier.check_geometric_chain(*args, explore=True)
        assert result.exploration and not result.gated
        assert not result.failed

    def test_meta_chain_requires_support(self, verifier, mixed_qubit):
        with pytest.raises(SupportViolation):
            verifier.check_meta_chain(identity_map(2), identity_map(2), mixed_qubit, basis_state(2, 0), TWO)

    @pytest.mark.parametrize("alpha", ["1.5", "2", "inf"])
    def test_sandwiched_chain(self, verifier, instance, alpha):
        result = verifier.check_sandwiched_chain(
            instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.parse(alpha)
        )
        assert result.passed, result.to_dict()
        assert set(result.details) == {"input_term", "channel_term", "spectrum_term"}

    def test_sandwiched_chain_order_one(self, verifier, instance):
        with pytest.raises(OrderOutOfRange):
            verifier.check_sandwiched_chain(
                instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.one()
            )

    def test_sandwiched_chain_below_one_explores(self, verifier, instance):
        args = (instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.finite(0.6))
        with pytest.raises(OrderOutOfRange):
            verifier.check_sandwiched_chain(*args)
        assert verifier.check_sandwiched_chain(*args, explore=True).exploration

    def test_preprocessing_chain(self, verifier, instance, rng):
        basis = random_unitary(2, rng)
        for order in (RenyiOrder.finite(0.6), RenyiOrder.one(), INF):
            result = verifier.check_preprocessing_chain(
                instance["e"], instance["f"], instance["rho"], instance["sigma"], order, basis=basis
            )
            assert result.passed, result.to_dict()

    def test_regularized_chain(self, verifier, instance):
        result = verifier.check_regularized_chain(
            instance["e"], instance["f"], instance["rho"], instance["sigma"], TWO, n=2
        )
        assert result.passed
        assert result.details["n"] == 2
        assert set(result.details["slack_by_n"]) == {1, 2}
        assert result.details["slack_by_n"][2] == pytest.approx(result.slack)
        assert min(result.details["slack_by_n"].values()) >= -1e-7
        assert result.details["spectrum_trend_ok"] is True

    def test_regularized_chain_gates_on_spectrum_trend(self, verifier, instance, mocker):
        mocker.patch("qchain.core.verify.chain.spectrum_term", side_effect=lambda sigma, order: float(sigma.dim))
        result = verifier.check_regularized_chain(
            instance["e"], instance["f"], instance["rho"], instance["sigma"], TWO, n=2
        )
        assert result.slack >= 0.0
        assert result.details["spectrum_trend_ok"] is False
        assert result.failed

    def test_regularized_chain_with_transposed_maps(self, verifier, instance):
        e, f = instance["e"].transposed(), instance["f"].transposed()
        result = verifier.check_regularized_chain(e, f, instance["rho"], instance["sigma"], INF, n=2)
        assert result.passed, result.to_dict()

    def test_regularized_chain_order_range(self, verifier, instance):
        with pytest.raises(OrderOutOfRange):
            verifier.check_regularized_chain(
                instance["e"], instance["f"], instance["rho"], instance["sigma"], RenyiOrder.one()
            )


@pytest.mark.unit
class TestEntropyAndSuites:
    def test_unital_entropy(self, verifier, rng):
        e, f = random_unital_channel(3, seed=rng), random_unital_channel(3, seed=rng)
        rho = random_state(3, seed=rng)
        for order in (RenyiOrder.one(), TWO, INF):
            result = verifier.check_unital_entropy(e, f, rho, order)
            assert result.passed, result.to_dict()

    @pytest.mark.parametrize("alpha", ["1", "2", "inf"])
    def test_unital_entropy_never_decreases_with_equal_maps(self, verifier, rng, alpha):
        e = random_unital_channel(3, seed=rng)
        result = verifier.check_unital_entropy(e, e, random_state(3, seed=rng), RenyiOrder.parse(alpha))
        assert result.details["channel_term"] == pytest.approx(0.0, abs=1e-9)
        assert result.details["entropy_gain"] >= -1e-9
        assert result.passed

    def test_unital_entropy_rejects_non_unital(self, verifier, rng):
        reset = PositiveMapRep((np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 0.0]])))
        with pytest.raises(NonUnitalCandidate):
            verifier.check_unital_entropy(identity_map(2), reset, random_state(2, seed=rng), TWO)

    def test_unital_entropy_order_range(self, verifier, mixed_qubit):
        with pytest.raises(OrderOutOfRange):
            verifier.check_unital_entropy(identity_map(2), identity_map(2), mixed_qubit, RenyiOrder.finite(0.5))

    @pytest.mark.parametrize("alpha", ["0.5", "1", "2"])
    def test_matsumoto(self, verifier, instance, alpha):
        result = verifier.check_matsumoto(instance["rho"], instance["sigma"], RenyiOrder.parse(alpha))
        assert result.passed and result.gated
        assert result.details["refined_letters"] >= result.details["letters"]

    def test_matsumoto_holds_gamma_errors_to_reverse_test_tolerance(self, verifier, instance, mocker):
        from qchain.core.reverse_test import verify_reverse_test

        def loose_gamma(*args):
            report = verify_reverse_test(*args)
            report.gamma_p_error = 5e-8
            return report

        mocker.patch("qchain.core.verify.suites.verify_reverse_test", side_effect=loose_gamma)
        result = verifier.check_matsumoto(instance["rho"], instance["sigma"], TWO)
        assert 5e-8 < verifier.tol
        assert result.slack >= -verifier.tol
        assert result.details["gamma_within_tol"] is False
        assert result.failed

    def test_matsumoto_above_two_is_exploratory(self, verifier, instance):
        result = verifier.check_matsumoto(instance["rho"], instance["sigma"], RenyiOrder.finite(4.0))
        assert not result.gated

    @pytest.mark.parametrize("kind", ["sandwiched", "geometric"])
    def test_data_processing(self, verifier, instance, kind):
        result = verifier.check_data_processing(instance["e"], instance["rho"], instance["sigma"], TWO, kind)
        assert result.name == f"data_processing_{kind}"
        assert result.passed

    def test_data_processing_needs_channel(self, verifier, instance):
        with pytest.raises(UnsupportedMap):
            verifier.check_data_processing(transpose_map(2), instance["rho"], instance["sigma"], TWO)

    def test_data_processing_geometric_range(self, verifier, instance):
        with pytest.raises(OrderOutOfRange):
            verifier.check_data_processing(
                instance["e"], instance["rho"], instance["sigma"], INF, DivergenceKind.GEOMETRIC
            )

    @pytest.mark.parametrize("pair", ["measured_sandwiched", "sandwiched_geometric"])
    def test_ordering(self, verifier, instance, pair):
        result = verifier.check_ordering(instance["rho"], instance["sigma"], RenyiOrder.finite(1.5), pair)
        assert result.name == f"ordering_{pair}"
        assert result.passed

    def test_ordering_unknown_pair(self, verifier, instance):
        with pytest.raises(ValueError):
            verifier.check_ordering(instance["rho"], instance["sigma"], TWO, "geometric_measured")

    def test_classical_reduction(self, verifier, rng):
        u = random_unitary(3, rng)
        rho = DensityOperator.from_matrix((u * np.array([0.6, 0.3, 0.1])) @ u.conj().T)
        sigma = DensityOperator.from_matrix((u * np.array([0.2, 0.3, 0.5])) @ u.conj().T)
        result = verifier.check_classical_reduction(rho, sigma, RenyiOrder.finite(1.5))
        assert result.passed, result.to_dict()

    def test_classical_reduction_needs_commuting(self, verifier, plus_state):
        with pytest.raises(NonCommutingInputs):
            verifier.check_classical_reduction(plus_state, diagonal_state([0.7, 0.3]), TWO)

    def test_regularized_sequence(self, verifier):
        result = verifier.check_regularized_sequence(identity_map(2), depolarizing_map(2), INF)
        assert result.passed
        assert result.details["f"] == pytest.approx([1.0, 1.0], abs=1e-9)


@pytest.mark.unit
class TestRunCheck:
    def test_runs_registered_check(self, verifier):
        result = run_check("data_processing_sandwiched", 2, TWO, seed=3, verifier=verifier)
        assert result.passed
        assert result.instance_digest == "seed=3;dim=2;alpha=2"

    def test_seeded_instances_repeat(self, verifier):
        first = run_check("ordering_sandwiched_geometric", 3, TWO, seed=9, verifier=verifier)
        second = run_check("ordering_sandwiched_geometric", 3, TWO, seed=9, verifier=verifier)
        assert first.lhs_bits == second.lhs_bits

    def test_order_is_dropped_for_orderless_checks(self, verifier):
        result = run_check("pinching_inequality", 3, TWO, seed=1, verifier=verifier)
        assert result.alpha is None

    @pytest.mark.parametrize(
        "name,dim,order",
        [
            ("no_such_check", 2, TWO),
            ("regularized_chain", 9, TWO),
            ("matsumoto", 2, None),
            ("sandwiched_chain", 2, RenyiOrder.one()),
            ("pinching_inequality", 0, None),
        ],
    )
    def test_rejects_bad_requests(self, name, dim, order):
        with pytest.raises(ConfigError):
            run_check(name, dim, order)
