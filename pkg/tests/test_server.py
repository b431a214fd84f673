import numpy as np
import pytest
import fedda.server
from fedda.errors import EnumValueError, ProtocolError, ValueRangeError
from fedda.experiment import Federation
from fedda.model import FeatureMap, ModelConfig, ParamSet
from fedda.serializer import ParamSerializer
from fedda.server import (
    AlgoConfig,
    ClientReport,
    ClientState,
    InMemoryTransport,
    ServerState,
    account_payload,
    cyclic_source,
    cyclic_target,
    run_round,
    select_participants
)
from fedda.types import Algorithm, Modality
from fedda.utils import SeedStream


def test_cyclic_target_tables():
    assert [cyclic_target(k, 2) for k in (1, 2)] == [2, 1]
    assert [cyclic_target(k, 3) for k in (1, 2, 3)] == [2, 3, 1]
    assert cyclic_target(1, 1) == 1


@pytest.mark.parametrize('n', range(1, 11))
def test_cyclic_target_is_a_bijection(n):
    targets = [cyclic_target(k, n) for k in range(1, n + 1)]
    assert sorted(targets) == list(range(1, n + 1))
    assert all(cyclic_source(cyclic_target(k, n), n) == k for k in range(1, n + 1))


def test_cyclic_target_errors():
    with pytest.raises(ProtocolError):
        cyclic_target(0, 3)
    with pytest.raises(ProtocolError):
        cyclic_target(4, 3)
    with pytest.raises(ProtocolError):
        cyclic_source(1, 0)


def test_payload_accounting():
    cfg = ModelConfig()
    fedavg = account_payload(Algorithm.FEDAVG, cfg, bank_size=4)
    assert account_payload(Algorithm.FEDDA_JOINT, cfg, 4) == fedavg
    assert account_payload(Algorithm.KRUM, cfg, 4) == fedavg
    assert account_payload(Algorithm.FEDDA_CYCLIC, cfg, 4) - fedavg == 4 * 8 * 16 * 16 * 8 == 65536


def test_payload_accounting_matches_the_encoding(small_params):
    cfg = ModelConfig(image_size=8, feat_channels=4)
    assert account_payload('fedavg', cfg, 1) == len(ParamSerializer().dumps(small_params.segmentation()))


def test_transport_rejects_foreign_payloads(small_params):
    transport = InMemoryTransport(ModelConfig(image_size=8, feat_channels=4))
    with pytest.raises(ProtocolError):
        transport.upload_params(1, small_params.discriminator())
    with pytest.raises(ProtocolError):
        transport.upload_params(1, [small_params['decoder.conv.bias']])
    with pytest.raises(ProtocolError):
        transport.upload_params(1, {'decoder.conv.bias': [0.0, 0.0, 0.0]})
    with pytest.raises(ProtocolError):
        transport.upload_features(1, [np.zeros((4, 8, 8))])
    assert transport.uplink == {}


def test_transport_counts_and_copies(small_params):
    transport = InMemoryTransport(ModelConfig(image_size=8, feat_channels=4))
    arrays = small_params.segmentation()
    received = transport.broadcast(2, arrays)
    assert transport.downlink == {2: ParamSerializer().size(arrays)}
    assert received is not arrays
    assert all(np.array_equal(received[n], arrays[n]) for n in arrays)

    maps = [FeatureMap(np.ones((4, 8, 8)), 1, 0)]
    delivered = transport.deliver(2, maps)
    assert transport.downlink[2] == ParamSerializer().size(arrays) + 4 * 8 * 8 * 8
    assert (delivered[0].client_id, delivered[0].round) == (1, 0)


def test_state_validation(small_params):
    with pytest.raises(ProtocolError):
        ServerState(global_params=small_params.discriminator(), global_test=[])
    with pytest.raises(ProtocolError):
        ClientState(0, [], Modality.A, small_params, None, None, SeedStream(0))
    with pytest.raises(ProtocolError):
        ClientReport(1, seg_loss=float('nan'))


def test_algo_config_resolution():
    assert AlgoConfig('fedda_joint', 2).aggregator == 'fedavg'
    assert AlgoConfig('krum', 4).aggregator == 'krum'
    assert AlgoConfig('fedda_cyclic', 4, aggregator='krum').mode.value == 'cyclic'
    with pytest.raises(ValueRangeError):
        AlgoConfig('krum', 2)
    with pytest.raises(EnumValueError):
        AlgoConfig('moon', 2)
    with pytest.raises(EnumValueError):
        AlgoConfig('fedavg', 2, aggregator='median')
    with pytest.raises(ValueRangeError):
        AlgoConfig('fedavg', 2, adv_clients=(3,))


def test_participant_selection():
    full = AlgoConfig('fedavg', 4)
    assert select_participants(full, 0) == [1, 2, 3, 4]
    half = AlgoConfig('fedavg', 4, participation=0.5, seed=3)
    picks = [select_participants(half, r) for r in range(6)]
    assert all(len(p) == 2 and p == sorted(p) for p in picks)
    assert picks == [select_participants(half, r) for r in range(6)]


def global_vector(fed):
    return fed.server.model().flatten_segmentation()


def check_discriminator_invariance(monkeypatch, cfg, rounds):
    trained = {}
    original = fedda.server.local_train

    def recording(client, inputs, train_cfg):
        client, summary = original(client, inputs, train_cfg)
        trained[client.client_id] = client.params.discriminator()
        return client, summary

    monkeypatch.setattr(fedda.server, 'local_train', recording)
    fed = Federation(cfg)
    for _ in range(rounds):
        fed.step()
        assert set(fed.server.global_params) == set(fed.clients[0].params.names(('backbone', 'decoder')))
        for client in fed.clients:
            for name, array in trained[client.client_id].items():
                assert np.array_equal(client.params[name], array)
    return fed


@pytest.mark.parametrize('algorithm', [a.value for a in Algorithm])
def test_discriminators_change_only_inside_local_training(monkeypatch, tiny_cfg, algorithm):
    check_discriminator_invariance(monkeypatch, tiny_cfg.replace(algorithm=algorithm, num_clients=4), rounds=2)


@pytest.mark.slow
@pytest.mark.parametrize('algorithm', [a.value for a in Algorithm])
def test_discriminators_stay_local_over_ten_rounds(monkeypatch, tiny_cfg, algorithm):
    check_discriminator_invariance(monkeypatch, tiny_cfg.replace(algorithm=algorithm, num_clients=4), rounds=10)


def test_measured_uplink_matches_accounting(tiny_cfg):
    for algorithm in ('fedavg', 'fedda_joint', 'fedda_cyclic'):
        fed = Federation(tiny_cfg.replace(algorithm=algorithm))
        expected = account_payload(algorithm, fed.algo.model, tiny_cfg.bank_size)
        for report in fed.run():
            assert [c.uplink_bytes for c in report.clients] == [expected, expected]


def test_cyclic_downlink_carries_the_bank(tiny_cfg):
    fed = Federation(tiny_cfg.replace(algorithm='fedda_cyclic'))
    broadcast = account_payload('fedavg', fed.algo.model, 0)
    first, second = fed.run()
    assert [c.downlink_bytes for c in first.clients] == [broadcast, broadcast]
    assert [c.downlink_bytes for c in second.clients] == [broadcast + 2 * 4 * 8 * 8 * 8] * 2
    assert fed.server.cumulative_bytes == (
        first.uplink_bytes + second.uplink_bytes,
        first.downlink_bytes + second.downlink_bytes
    )


def test_joint_traffic_equals_fedavg(tiny_cfg):
    joint = Federation(tiny_cfg.replace(algorithm='fedda_joint'))
    plain = Federation(tiny_cfg)
    joint.run()
    plain.run()
    assert joint.server.cumulative_bytes == plain.server.cumulative_bytes


def test_zero_adversarial_weight_reproduces_fedavg(tiny_cfg):
    joint = Federation(tiny_cfg.replace(algorithm='fedda_joint', adv_weight=0.0))
    plain = Federation(tiny_cfg)
    joint.run()
    plain.run()
    assert global_vector(joint).tolist() == global_vector(plain).tolist()
    assert joint.reports[-1].metrics == plain.reports[-1].metrics


@pytest.mark.slow
def test_zero_adversarial_weight_tracks_fedavg_for_twenty_rounds(tiny_cfg):
    joint = Federation(tiny_cfg.replace(algorithm='fedda_joint', adv_weight=0.0))
    plain = Federation(tiny_cfg)
    for _ in range(20):
        joint.step()
        plain.step()
        assert global_vector(joint).tolist() == global_vector(plain).tolist()


def test_execution_order_does_not_matter(tiny_cfg):
    cfg = tiny_cfg.replace(algorithm='fedda_cyclic')
    forward, backward = Federation(cfg), Federation(cfg)
    for _ in range(2):
        assert forward.step(order=[1, 2]) == backward.step(order=[2, 1])
    assert global_vector(forward).tolist() == global_vector(backward).tolist()


def test_threads_do_not_change_results(tiny_cfg):
    cfg = tiny_cfg.replace(algorithm='fedda_joint')
    serial, threaded = Federation(cfg), Federation(cfg, threads=2)
    assert serial.run() == threaded.run()
    assert global_vector(serial).tolist() == global_vector(threaded).tolist()


def test_order_must_list_the_participants(tiny_cfg):
    fed = Federation(tiny_cfg)
    with pytest.raises(ProtocolError):
        fed.step(order=[1])


def test_client_count_mismatch(tiny_cfg):
    fed = Federation(tiny_cfg)
    with pytest.raises(ProtocolError):
        run_round(fed.server, fed.clients[:1], fed.algo)


def test_cyclic_rounds(tiny_cfg):
    fed = Federation(tiny_cfg.replace(algorithm='fedda_cyclic'))
    first = fed.step()
    assert [c.adv_loss for c in first.clients] == [0.0, 0.0]
    assert sorted(fed.server.feature_bank) == [1, 2]
    assert all(len(maps) == 2 for maps in fed.server.feature_bank.values())
    assert {m.round for maps in fed.server.feature_bank.values() for m in maps} == {0}
    assert [m.client_id for m in fed.server.feature_bank[1]] == [1, 1]

    second = fed.step()
    assert all(c.adv_loss > 0 and c.disc_loss > 0 for c in second.clients)
    assert [t.client_id for t in fed.clients[0].target_features] == [2, 2]
    assert [t.client_id for t in fed.clients[1].target_features] == [1, 1]
    assert {m.round for maps in fed.server.feature_bank.values() for m in maps} == {1}


def test_single_client_cyclic_runs_without_alignment(tiny_cfg):
    fed = Federation(tiny_cfg.replace(algorithm='fedda_cyclic', num_clients=1))
    for report in fed.run():
        assert report.clients[0].adv_loss == 0.0
        assert report.clients[0].disc_loss == 0.0


def test_partial_participation(tiny_cfg):
    cfg = tiny_cfg.replace(num_clients=4, participation=0.5, algorithm='fedda_joint')
    fed = Federation(cfg)
    for report in fed.run():
        active = [c for c in report.clients if c.participated]
        idle = [c for c in report.clients if not c.participated]
        assert len(active) == len(idle) == 2
        assert [c.client_id for c in active] == select_participants(fed.algo, report.round)
        assert all(c.uplink_bytes == c.downlink_bytes == 0 and c.seg_loss == 0.0 for c in idle)
        assert report.mean_losses()[0] > 0


def test_adversarial_clients_subset(tiny_cfg):
    fed = Federation(tiny_cfg.replace(algorithm='fedda_joint', adv_clients=(1,)))
    report = fed.step()
    one, two = report.clients
    assert one.disc_loss > 0 and one.adv_loss > 0
    assert two.disc_loss == 0.0 and two.adv_loss == 0.0


def test_krum_with_cyclic_training_keeps_one_client_model(tiny_cfg):
    fed = Federation(tiny_cfg.replace(algorithm='fedda_cyclic', aggregator='krum', num_clients=4))
    for _ in range(2):
        fed.step()
        vector = global_vector(fed).tolist()
        assert any(c.params.flatten_segmentation().tolist() == vector for c in fed.clients)
    assert isinstance(fed.server.model(), ParamSet)


@pytest.mark.slow
def test_krum_with_cyclic_training_over_twenty_rounds(monkeypatch, tiny_cfg):
    cfg = tiny_cfg.replace(algorithm='fedda_cyclic', aggregator='krum', num_clients=4)
    fed = check_discriminator_invariance(monkeypatch, cfg, rounds=20)
    assert len(fed.reports) == 20
    vector = global_vector(fed).tolist()
    assert any(c.params.flatten_segmentation().tolist() == vector for c in fed.clients)
