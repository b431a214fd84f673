# Copyright (c) 2026 fedda contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""
Command line entry point.

    fedda run --config exp.cfg [--seed N] [--algorithm NAME] [--out PATH]
    fedda sweep --config exp.cfg --key adv_weight --values 0,0.01,0.1
    fedda gen-data --config exp.cfg --out split.fdas

Exit status is 0 on success, 1 when a file cannot be read or written
and 2 on any configuration, data or protocol error.
"""

import argparse
import sys
from fedda.config import ExperimentConfig, load_config
from fedda.constants import seed_namespaces, sweepable_keys
from fedda.data import make_split
from fedda.errors import FedDAError
from fedda.experiment import run_experiment, sweep
from fedda.globals import version
from fedda.logger import logger, set_logger
from fedda.storage import DatasetStorage
from fedda.types import Algorithm, List, Optional
from fedda.utils import SeedStream


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='fedda',
        description='Federated segmentation with feature-level domain alignment, simulated.'
    )
    parser.add_argument('--version', action='version', version='%(prog)s ' + '.'.join(map(str, version)))
    parser.add_argument('--log-level', default='INFO', help='console log level (default: INFO)')
    parser.add_argument('--log-file', default=None, help='also log DEBUG and above to this file')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='run one experiment and write its CSV report')
    run.add_argument('--config', required=True, help='experiment config file')
    run.add_argument('--seed', type=int, default=None, help='override the config seed')
    run.add_argument(
        '--algorithm', default=None, choices=[a.value for a in Algorithm],
        help='override the config algorithm'
    )
    run.add_argument('--out', default=None, help='override the report path')

    sw = commands.add_parser('sweep', help='run one experiment per value of a key')
    sw.add_argument('--config', required=True, help='experiment config file')
    sw.add_argument('--key', required=True, help='one of: %s' % ', '.join(sweepable_keys))
    sw.add_argument('--values', required=True, help='comma separated values')
    sw.add_argument('--workers', type=int, default=None, help='parallel processes (default: config workers)')

    gen = commands.add_parser('gen-data', help='write the synthetic split as a dataset file')
    gen.add_argument('--config', required=True, help='experiment config file')
    gen.add_argument('--out', required=True, help='dataset file path')
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if getattr(args, 'seed', None) is not None:
        cfg = cfg.with_value('seed', str(args.seed))
    if getattr(args, 'algorithm', None) is not None:
        cfg = cfg.with_value('algorithm', args.algorithm)
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    result = run_experiment(cfg, out=args.out)
    if result.path is not None:
        print(result.path)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = [v for v in args.values.split(',') if v.strip()]
    for row in sweep(cfg, args.key, values, workers=args.workers):
        print('%s\t%.4f\t%.4f\t%s' % (row.value, row.mean_dice, row.mean_hd95, row.path))
    return 0


def cmd_gen_data(args) -> int:
    cfg = _load(args)
    data_cfg = cfg.data_config()
    split = make_split(SeedStream(cfg.seed).child(seed_namespaces['data']), data_cfg)
    size = DatasetStorage(args.out, data_cfg).write(split)
    logger.info('Wrote {n} samples ({b} bytes) to {p}', n=len(split.all_samples()), b=size, p=args.out)
    return 0


commands = {
    'run': cmd_run,
    'sweep': cmd_sweep,
    'gen-data': cmd_gen_data
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_logger(args.log_level, args.log_file)
    try:
        return commands[args.command](args)
    except FedDAError as e:
        logger.error('{name}: {msg}', name=type(e).__name__, msg=str(e))
        return 2
    except OSError as e:
        logger.error(str(e))
        return 1


if __name__ == '__main__':
    sys.exit(main())
