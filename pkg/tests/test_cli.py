import pytest
from fedda.cli import build_parser, main

config = '''
seed = 3
rounds = 1
image_size = 8
feat_channels = 4
train_patients = 8
test_patients = 2
'''


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / 'exp.cfg'
    path.write_text(config, encoding='utf-8')
    return path


def test_run(tmp_path, config_path, capsys):
    out = tmp_path / 'report.csv'
    assert main(['run', '--config', str(config_path), '--algorithm', 'fedda_joint', '--out', str(out)]) == 0
    assert capsys.readouterr().out.strip() == str(out)
    assert out.read_text(encoding='utf-8').startswith('round,client_id,seg_loss')


def test_run_without_a_report_prints_nothing(config_path, capsys):
    assert main(['run', '--config', str(config_path), '--out', '']) == 0
    assert capsys.readouterr().out == ''


def test_bad_config_exits_with_2(tmp_path):
    path = tmp_path / 'bad.cfg'
    path.write_text('algorithm = moon\n', encoding='utf-8')
    assert main(['run', '--config', str(path)]) == 2


def test_missing_config_exits_with_1(tmp_path):
    assert main(['run', '--config', str(tmp_path / 'nope.cfg')]) == 1


def test_gen_data(tmp_path, config_path):
    out = tmp_path / 'split.fdas'
    assert main(['gen-data', '--config', str(config_path), '--out', str(out)]) == 0
    assert out.stat().st_size == 12 + (8 * 2 + 2 * 2) * (5 + 5 * 8 * 8)


def test_sweep(tmp_path, config_path):
    config_path.write_text(config + 'output = %s\n' % (tmp_path / 'out.csv'), encoding='utf-8')
    assert main(['sweep', '--config', str(config_path), '--key', 'bank_size', '--values', '1,2']) == 0
    assert (tmp_path / 'out_bank_size_sweep.csv').exists()
    assert (tmp_path / 'out_bank_size_2.csv').exists()


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
