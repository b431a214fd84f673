import csv
import pytest
from fedda.config import ExperimentConfig
from fedda.constants import csv_columns
from fedda.data import make_split
from fedda.errors import ConfigError
from fedda.experiment import ExperimentResult, Federation, run_experiment, sweep, sweep_path, write_report
from fedda.utils import SeedStream


def read_rows(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.reader(f))


def test_report_is_byte_identical_across_runs(tmp_path, tiny_cfg):
    cfg = tiny_cfg.replace(algorithm='fedda_joint')
    a = run_experiment(cfg, out=tmp_path / 'a.csv')
    b = run_experiment(cfg, out=tmp_path / 'b.csv')
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
    assert a.path == tmp_path / 'a.csv'
    assert a.metrics == b.metrics


def test_report_layout(tmp_path, tiny_cfg):
    path = tmp_path / 'report.csv'
    result = run_experiment(tiny_cfg, out=path)
    rows = read_rows(path)

    assert rows[0] == csv_columns(3)
    assert len(rows) == 1 + 2 * 2 + 1
    assert [r[:2] for r in rows[1:5]] == [['0', '1'], ['0', '2'], ['1', '1'], ['1', '2']]

    summary = rows[-1]
    assert summary[:2] == ['summary', 'all']
    assert float(summary[5]) == result.metrics.mean_dice
    assert float(summary[6]) == result.metrics.mean_hd95
    assert int(summary[-2]) == result.uplink_bytes
    assert int(summary[-1]) == result.downlink_bytes
    assert float(summary[2]) == result.reports[-1].mean_losses()[0]

    last = result.reports[-1]
    assert float(rows[4][2]) == last.clients[1].seg_loss
    assert rows[3][5:11] == rows[4][5:11]


def test_zero_rounds(tmp_path, tiny_cfg):
    path = tmp_path / 'untrained.csv'
    result = run_experiment(tiny_cfg.replace(rounds=0), out=path)
    rows = read_rows(path)
    assert len(rows) == 2
    assert rows[1][:5] == ['summary', 'all', '0', '0', '0']
    assert (result.uplink_bytes, result.downlink_bytes) == (0, 0)
    assert result.reports == []


def test_empty_output_skips_the_file(tiny_cfg):
    result = run_experiment(tiny_cfg.replace(rounds=1))
    assert result.path is None
    assert len(result.reports) == 1


def test_sweep_of_one_value_equals_a_run(tmp_path, tiny_cfg):
    cfg = tiny_cfg.replace(algorithm='fedda_joint', output=str(tmp_path / 'out.csv'))
    [row] = sweep(cfg, 'adv_weight', ['0.1'])
    run_experiment(cfg, out=tmp_path / 'direct.csv')

    assert row.path == tmp_path / 'out_adv_weight_0.1.csv'
    assert row.path.read_bytes() == (tmp_path / 'direct.csv').read_bytes()

    table = read_rows(sweep_path(cfg.output, 'adv_weight', 'sweep'))
    assert table[0] == ['value', 'mean_dice', 'mean_hd95', 'uplink_bytes', 'downlink_bytes']
    assert table[1][0] == '0.1'
    assert float(table[1][1]) == row.mean_dice


def test_sweep_at_zero_weight_matches_fedavg(tmp_path, tiny_cfg):
    cfg = tiny_cfg.replace(algorithm='fedda_joint', output=str(tmp_path / 'joint.csv'))
    rows = sweep(cfg, 'adv_weight', ['0', '0.5'])
    fedavg = run_experiment(tiny_cfg, out=tmp_path / 'fedavg.csv')

    assert [r.value for r in rows] == ['0', '0.5']
    assert rows[0].mean_dice == fedavg.metrics.mean_dice
    assert rows[0].mean_hd95 == fedavg.metrics.mean_hd95

    swept, plain = read_rows(rows[0].path), read_rows(tmp_path / 'fedavg.csv')
    assert [r[5:11] for r in swept] == [r[5:11] for r in plain]


def test_sweep_rejects_bad_requests(tmp_path, tiny_cfg):
    cfg = tiny_cfg.replace(output=str(tmp_path / 'out.csv'))
    with pytest.raises(ConfigError):
        sweep(cfg, 'lr_backbone', ['0.1'])
    with pytest.raises(ConfigError):
        sweep(cfg, 'bank_size', ['0'])
    with pytest.raises(ConfigError):
        sweep(cfg, 'bank_size', [])
    with pytest.raises(ConfigError):
        sweep(tiny_cfg, 'bank_size', ['2'])


def test_federation_rejects_a_foreign_split(tiny_cfg):
    split = make_split(SeedStream(0), tiny_cfg.replace(num_clients=4).data_config())
    with pytest.raises(ConfigError):
        Federation(tiny_cfg, split=split)


def test_federation_accepts_a_stored_split(tiny_cfg):
    split = make_split(SeedStream(tiny_cfg.seed).child(1), tiny_cfg.data_config())
    given, built = Federation(tiny_cfg, split=split), Federation(tiny_cfg)
    assert given.step() == built.step()
    assert repr(built) == '<Federation algorithm=fedavg clients=2 round=1>'


@pytest.mark.slow
@pytest.mark.parametrize('algorithm', ['fedda_joint', 'fedda_cyclic'])
def test_ten_round_reports_ignore_execution_order(tmp_path, tiny_cfg, algorithm):
    cfg = tiny_cfg.replace(algorithm=algorithm, rounds=10)
    run_experiment(cfg, out=tmp_path / 'first.csv')
    run_experiment(cfg, out=tmp_path / 'second.csv')

    fed = Federation(cfg)
    reports = [fed.step(order=[2, 1]) for _ in range(cfg.rounds)]
    reversed_run = ExperimentResult(
        reports=reports,
        metrics=reports[-1].metrics,
        uplink_bytes=fed.server.uplink_bytes,
        downlink_bytes=fed.server.downlink_bytes
    )
    write_report(tmp_path / 'reversed.csv', reversed_run, cfg.num_classes)

    first = (tmp_path / 'first.csv').read_bytes()
    assert (tmp_path / 'second.csv').read_bytes() == first
    assert (tmp_path / 'reversed.csv').read_bytes() == first


@pytest.mark.slow
@pytest.mark.parametrize('algorithm', ['fedavg', 'krum', 'fedprox', 'fedda_cyclic', 'fedda_joint'])
def test_long_runs_stay_finite(tiny_cfg, algorithm):
    cfg = tiny_cfg.replace(algorithm=algorithm, num_clients=4, rounds=10, train_patients=16)
    result = run_experiment(cfg)
    assert 0.0 <= result.metrics.mean_dice <= 1.0
    assert all(c.seg_loss == c.seg_loss for r in result.reports for c in r.clients)


@pytest.mark.slow
@pytest.mark.parametrize('algorithm', ['fedda_joint', 'fedda_cyclic'])
def test_alignment_beats_fedavg_across_modalities(algorithm):
    gains = []
    for seed in (1, 2, 3):
        base = ExperimentConfig(seed=seed, rounds=50, output='')
        plain = run_experiment(base).metrics.mean_dice
        aligned = run_experiment(base.replace(algorithm=algorithm)).metrics.mean_dice
        gains.append(aligned - plain)
    assert sum(g > 0 for g in gains) >= 2
    assert sum(gains) / len(gains) >= 0.01
