import numpy as np
import pytest
from fedda.aggregator import (
    AggregationInput,
    FedAvgAggregator,
    FedProxAggregator,
    KrumAggregator,
    fedavg_aggregate,
    get_aggregator,
    krum_scores,
    krum_select,
    proximal_term
)
from fedda.autodiff import Tape, Tensor
from fedda.errors import AggregationError, EnumValueError, ShapeError, ValueRangeError


def test_fedavg_example():
    result = fedavg_aggregate(AggregationInput([np.array([1.0, 2.0]), np.array([3.0, 4.0])], [1, 3]))
    assert result.tolist() == [2.5, 3.5]


def test_fedavg_matches_closed_form(rng):
    vectors = [rng.normal(size=50) for _ in range(5)]
    weights = rng.integers(1, 40, size=5).tolist()
    expected = sum(w * v for w, v in zip(weights, vectors)) / sum(weights)
    np.testing.assert_allclose(fedavg_aggregate(AggregationInput(vectors, weights)), expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize('scale', [1e-3, 0.5, 7.0, 1e4])
def test_fedavg_ignores_a_uniform_weight_scale(rng, scale):
    vectors = [rng.normal(size=30) for _ in range(4)]
    weights = rng.integers(1, 20, size=4).tolist()
    plain = fedavg_aggregate(AggregationInput(vectors, weights))
    scaled = fedavg_aggregate(AggregationInput(vectors, [w * scale for w in weights]))
    np.testing.assert_allclose(scaled, plain, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('seed', range(10))
def test_fedavg_stays_inside_the_envelope(seed):
    rng = np.random.default_rng(seed)
    vectors = [rng.normal(size=40) * 5 for _ in range(5)]
    result = fedavg_aggregate(AggregationInput(vectors, rng.uniform(0.1, 10, size=5).tolist()))
    stacked = np.stack(vectors)
    assert (result >= stacked.min(axis=0) - 1e-12).all()
    assert (result <= stacked.max(axis=0) + 1e-12).all()


def test_aggregation_input_errors():
    with pytest.raises(AggregationError):
        AggregationInput([], [])
    with pytest.raises(AggregationError):
        AggregationInput([np.zeros(2)], [1, 2])
    with pytest.raises(ShapeError):
        AggregationInput([np.zeros(2), np.zeros(3)], [1, 1])
    with pytest.raises(AggregationError):
        AggregationInput([np.zeros(2)], [-1])
    with pytest.raises(AggregationError):
        fedavg_aggregate(AggregationInput([np.zeros(2)], [0]))


def brute_krum(vectors, f):
    k = len(vectors)
    best, best_score = None, None
    for i in range(k):
        distances = sorted(float(((vectors[i] - vectors[j]) ** 2).sum()) for j in range(k) if j != i)
        score = sum(distances[:k - f - 2])
        if best_score is None or score < best_score:
            best, best_score = i, score
    return best


@pytest.mark.parametrize('seed', range(20))
def test_krum_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    vectors = [rng.normal(size=6) for _ in range(5)]
    selection = krum_select(AggregationInput(vectors, [1] * 5, krum_f=1))
    assert selection.client_id == brute_krum(vectors, 1) + 1
    np.testing.assert_array_equal(selection.vector, vectors[selection.client_id - 1])


def test_krum_never_picks_a_planted_outlier(rng):
    for _ in range(10):
        honest = [rng.normal(size=8) * 0.1 for _ in range(3)]
        outlier = rng.normal(size=8) * 0.1 + 100.0
        for position in range(4):
            vectors = honest[:position] + [outlier] + honest[position:]
            selection = krum_select(AggregationInput(vectors, [1] * 4, krum_f=1))
            assert selection.client_id != position + 1


def test_krum_needs_enough_clients():
    with pytest.raises(AggregationError):
        krum_scores(AggregationInput([np.zeros(2)] * 3, [1] * 3, krum_f=1))
    assert len(krum_scores(AggregationInput([np.zeros(2)] * 3, [1] * 3, krum_f=0))) == 3


def test_krum_ties_go_to_the_lowest_id():
    vectors = [np.zeros(3)] * 4
    assert krum_select(AggregationInput(vectors, [1] * 4, client_ids=[2, 3, 5, 7])).client_id == 2
    assert KrumAggregator().aggregate(AggregationInput(vectors, [1] * 4)).tolist() == [0.0, 0.0, 0.0]


def test_krum_scores_are_symmetric_sums(rng):
    vectors = [rng.normal(size=4) for _ in range(6)]
    scores = krum_scores(AggregationInput(vectors, [1] * 6, krum_f=2))
    for i, score in enumerate(scores):
        distances = sorted(float(((vectors[i] - v) ** 2).sum()) for j, v in enumerate(vectors) if j != i)
        assert score == pytest.approx(sum(distances[:2]))


def test_proximal_term_value_and_gradient():
    local = Tensor([3.0, 4.0], requires_grad=True)
    with Tape() as tape:
        term = proximal_term(local, np.zeros(2), mu=2.0)
    tape.backward(term)
    assert term.item() == 25.0
    assert local.grad.tolist() == [6.0, 8.0]


def test_proximal_term_list_form(rng):
    parts = [rng.normal(size=(2, 3)), rng.normal(size=4)]
    refs = [rng.normal(size=(2, 3)), rng.normal(size=4)]
    flat = proximal_term(
        Tensor(np.concatenate([p.ravel() for p in parts])),
        np.concatenate([r.ravel() for r in refs]),
        mu=0.3
    )
    listed = proximal_term([Tensor(p) for p in parts], refs, mu=0.3)
    assert listed.item() == pytest.approx(flat.item(), rel=1e-14)


def test_proximal_term_errors():
    with pytest.raises(ValueRangeError):
        proximal_term(Tensor([1.0]), np.zeros(1), mu=-0.1)
    with pytest.raises(ShapeError):
        proximal_term(Tensor([1.0, 2.0]), np.zeros(3), mu=0.1)
    assert proximal_term(Tensor([1.0, 2.0]), np.zeros(2), mu=0.0).item() == 0.0


def test_registry():
    assert isinstance(get_aggregator('fedavg'), FedAvgAggregator)
    assert isinstance(get_aggregator('krum'), KrumAggregator)
    assert isinstance(get_aggregator('fedprox'), FedProxAggregator)
    with pytest.raises(EnumValueError):
        get_aggregator('median')


def test_fedprox_server_side_is_the_weighted_mean(rng):
    vectors = [rng.normal(size=5) for _ in range(3)]
    weights = [2, 1, 1]
    inputs = AggregationInput(vectors, weights)
    np.testing.assert_array_equal(FedProxAggregator().aggregate(inputs), FedAvgAggregator().aggregate(inputs))
