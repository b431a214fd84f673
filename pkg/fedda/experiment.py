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

import csv
import dataclasses
import pathlib
import time
from concurrent.futures import ProcessPoolExecutor
from fedda.config import ExperimentConfig, parse_value
from fedda.constants import csv_columns, seed_namespaces, sweepable_keys
from fedda.data import FederatedSplit, make_split
from fedda.errors import ConfigError
from fedda.logger import logger
from fedda.metrics import ClassMetrics, evaluate_global
from fedda.model import build_model
from fedda.server import ClientState, RoundReport, ServerState, run_round
from fedda.types import List, Optional, Sequence, Union
from fedda.utils import SeedStream, catch_exceptions, format_float


class Federation:
    """
    A simulated federation: one server, N clients and the synthetic
    two-modality split they train on. Everything is derived from the
    config's seed, so two federations built from the same config run
    identically, round for round.

    The seed stream is cut into namespaces: one for the patients of
    the split, one for the shared model initialisation, one per
    client (data order and discriminator-side sampling, keyed by
    round) and one for the server (participant selection). A client
    therefore draws the same numbers whether it trains first, last
    or on another thread.

    Every client starts from the same initial model, discriminator
    included; afterwards only the segmentation half is ever shared.

        >>> from fedda import Federation, parse_config
        >>> fed = Federation(parse_config('algorithm = fedda_joint\\nrounds = 3'))
        >>> for report in fed.run():
        ...     print(report.round, report.metrics.mean_dice)

    Use `step()` to drive the federation one round at a time and
    `evaluate()` to score the current global model.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        split: Optional[FederatedSplit] = None,
        threads: int = 1
    ):
        self.cfg = cfg
        self.algo = cfg.algo_config(threads=threads)
        data_cfg = cfg.data_config()
        root = SeedStream(cfg.seed)

        if split is None:
            split = make_split(root.child(seed_namespaces['data']), data_cfg)
        if split.num_clients != cfg.num_clients:
            raise ConfigError('the split has %d clients, the config %d' % (split.num_clients, cfg.num_clients))
        self.split = split

        init = build_model(self.algo.model, root.spawn(seed_namespaces['init']))
        self.server = ServerState(global_params=init.segmentation(), global_test=list(split.global_test))

        train = self.algo.train
        modalities = data_cfg.client_modalities()
        self.clients: List[ClientState] = [
            ClientState(
                client_id=k + 1,
                dataset=list(dataset),
                modality=modalities[k],
                params=init,
                seg_opt=train.seg_optimizer(),
                disc_opt=train.disc_optimizer(),
                rng=root.child(seed_namespaces['clients'], k + 1)
            )
            for k, dataset in enumerate(split.client_datasets)
        ]
        self.reports: List[RoundReport] = []

    def __repr__(self):
        return '<Federation algorithm=%s clients=%d round=%d>' % (
            self.algo.algorithm.value, len(self.clients), self.server.round
        )

    def step(self, order: Optional[Sequence[int]] = None) -> RoundReport:
        self.server, self.clients, report = run_round(self.server, self.clients, self.algo, order=order)
        self.reports.append(report)
        return report

    def run(self, rounds: Optional[int] = None) -> List[RoundReport]:
        rounds = self.cfg.rounds if rounds is None else rounds
        return [self.step() for _ in range(rounds)]

    def evaluate(self) -> ClassMetrics:
        return evaluate_global(self.server.model(), self.server.global_test, self.algo.model)


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    reports: List[RoundReport]
    metrics: ClassMetrics
    uplink_bytes: int
    downlink_bytes: int
    path: Optional[pathlib.Path] = None


def _metric_cells(metrics: ClassMetrics) -> list:
    return (
        [format_float(metrics.mean_dice), format_float(metrics.mean_hd95)]
        + [format_float(d) for d in metrics.dice]
        + [format_float(h) for h in metrics.hd95]
    )


def report_rows(result: ExperimentResult) -> List[list]:
    """
    CSV rows without the header: one per (round, client), then the
    summary row.
    """

    rows = []
    for report in result.reports:
        for client in report.clients:
            rows.append(
                [str(report.round), str(client.client_id)]
                + [format_float(client.seg_loss), format_float(client.adv_loss), format_float(client.disc_loss)]
                + _metric_cells(report.metrics)
                + [str(client.uplink_bytes), str(client.downlink_bytes)]
            )

    losses = result.reports[-1].mean_losses() if result.reports else (0.0, 0.0, 0.0)
    rows.append(
        ['summary', 'all']
        + [format_float(v) for v in losses]
        + _metric_cells(result.metrics)
        + [str(result.uplink_bytes), str(result.downlink_bytes)]
    )
    return rows


def write_report(path: Union[str, pathlib.Path], result: ExperimentResult, num_classes: int):
    path = pathlib.Path(path)
    try:
        if path.parent != pathlib.Path('.'):
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(csv_columns(num_classes))
            writer.writerows(report_rows(result))
    except OSError as e:
        raise OSError(e.errno, 'cannot write report "%s": %s' % (path, e.strerror)) from e


@catch_exceptions()
def run_experiment(cfg: ExperimentConfig, out: Optional[Union[str, pathlib.Path]] = None) -> ExperimentResult:
    """
    Build the federation, run `cfg.rounds` rounds and write the CSV
    report to `out`, or to `cfg.output` when `out` is None. An empty
    path skips writing.

    With `rounds = 0` the report holds just the header and the
    summary of the untrained model.
    """

    started = time.perf_counter()
    logger.info(
        'Starting {a} with {n} clients for {r} rounds (seed {s})',
        a=cfg.algorithm, n=cfg.num_clients, r=cfg.rounds, s=cfg.seed
    )

    fed = Federation(cfg)
    reports = fed.run()
    metrics = reports[-1].metrics if reports else fed.evaluate()
    result = ExperimentResult(
        reports=reports,
        metrics=metrics,
        uplink_bytes=fed.server.uplink_bytes,
        downlink_bytes=fed.server.downlink_bytes
    )

    target = out if out is not None else cfg.output
    if target:
        write_report(target, result, cfg.num_classes)
        result = dataclasses.replace(result, path=pathlib.Path(target))

    logger.success(
        'Finished {a}: dice={d:.4f} hd95={h:.3f} in {t:.1f}s',
        a=cfg.algorithm, d=metrics.mean_dice, h=metrics.mean_hd95, t=time.perf_counter() - started
    )
    return result


@dataclasses.dataclass(frozen=True)
class SweepRow:
    value: str
    mean_dice: float
    mean_hd95: float
    uplink_bytes: int
    downlink_bytes: int
    path: pathlib.Path


def sweep_path(output: Union[str, pathlib.Path], key: str, value: str) -> pathlib.Path:
    output = pathlib.Path(output)
    return output.with_name('%s_%s_%s%s' % (output.stem, key, value, output.suffix or '.csv'))


def _sweep_one(args) -> SweepRow:
    cfg, text, path = args
    result = run_experiment(cfg, out=path)
    return SweepRow(
        value=text,
        mean_dice=result.metrics.mean_dice,
        mean_hd95=result.metrics.mean_hd95,
        uplink_bytes=result.uplink_bytes,
        downlink_bytes=result.downlink_bytes,
        path=path
    )


@catch_exceptions()
def sweep(
    cfg: ExperimentConfig,
    key: str,
    values: Sequence[str],
    workers: Optional[int] = None
) -> List[SweepRow]:
    """
    One `run_experiment` per value of `key`, all with the same seed,
    plus a comparison table of the final metrics.

    Parameters:

        :param key (str):
            One of `adv_weight`, `bank_size`, `fedprox_mu`.

        :param values (list of str):
            Values in config-file syntax; each is parsed and range
            checked like a config line.

        :param workers (int):
            Worker processes (default `cfg.workers`). Every value
            owns its output file, so runs are independent.

    Return:

        One SweepRow per value, in the given order. The table lands
        next to `cfg.output` as `<stem>_<key>_sweep.csv`.
    """

    if key not in sweepable_keys:
        raise ConfigError('"%s" cannot be swept; choose from %s' % (key, ', '.join(sweepable_keys)))
    if not values:
        raise ConfigError('sweep needs at least one value')
    if not cfg.output:
        raise ConfigError('sweep needs an output path to name its reports after')

    jobs = []
    for text in values:
        text = str(text).strip()
        value = parse_value(key, text)
        jobs.append((cfg.replace(**{key: value}), text, sweep_path(cfg.output, key, text)))

    workers = cfg.workers if workers is None else workers
    logger.info('Sweeping {k} over {v} with {w} worker(s)', k=key, v=[j[1] for j in jobs], w=workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(job) for job in jobs]

    table = sweep_path(cfg.output, key, 'sweep')
    try:
        with open(table, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['value', 'mean_dice', 'mean_hd95', 'uplink_bytes', 'downlink_bytes'])
            for row in rows:
                writer.writerow([
                    row.value, format_float(row.mean_dice), format_float(row.mean_hd95),
                    str(row.uplink_bytes), str(row.downlink_bytes)
                ])
    except OSError as e:
        raise OSError(e.errno, 'cannot write sweep table "%s": %s' % (table, e.strerror)) from e

    return rows
