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
The federation protocol: synchronous rounds between one server and
N clients over an in-memory transport that counts every byte.
"""

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
import numpy as np
from fedda.aggregator import AggregationInput, get_aggregator
from fedda.autodiff import AdamState
from fedda.constants import algorithms, seed_namespaces
from fedda.errors import EnumValueError, ProtocolError, ValueRangeError
from fedda.logger import logger
from fedda.metrics import ClassMetrics, evaluate_global
from fedda.model import FeatureMap, ModelConfig, ParamSet, segmentation_groups
from fedda.serializer import FeatureSerializer, ParamSerializer
from fedda.trainer import LocalTrainConfig, RoundInputs, local_train, sample_bank_features
from fedda.types import (
    Algorithm,
    Dict,
    FloatArray,
    List,
    Mapping,
    Modality,
    Optional,
    Sequence,
    Tuple,
    TrainMode
)
from fedda.utils import SeedStream


@dataclasses.dataclass
class ClientState:
    """
    Everything a client keeps between rounds. The discriminator half
    of `params` and `disc_opt` never leave this object.
    """

    client_id: int
    dataset: list
    modality: Modality
    params: ParamSet
    seg_opt: AdamState
    disc_opt: AdamState
    rng: SeedStream
    target_features: List[FeatureMap] = dataclasses.field(default_factory=list)

    def __post_init__(self):
        if self.client_id < 1:
            raise ProtocolError('client ids are 1-based, got %d' % (self.client_id,))


@dataclasses.dataclass
class ServerState:
    """
    Server-side state. `feature_bank` maps a client id to the maps it
    uploaded in the previous round; `global_test` is the held-out
    evaluation set and never contains client training data.
    """

    global_params: Dict[str, FloatArray]
    global_test: list
    feature_bank: Dict[int, List[FeatureMap]] = dataclasses.field(default_factory=dict)
    round: int = 0
    uplink_bytes: int = 0
    downlink_bytes: int = 0

    def __post_init__(self):
        stray = [n for n in self.global_params if n.split('.', 1)[0] not in segmentation_groups]
        if stray:
            raise ProtocolError('the global model holds non-segmentation parameters: %s' % (stray,))

    @property
    def cumulative_bytes(self) -> Tuple[int, int]:
        return self.uplink_bytes, self.downlink_bytes

    def model(self) -> ParamSet:
        return ParamSet(self.global_params)


@dataclasses.dataclass(frozen=True)
class ClientReport:
    client_id: int
    seg_loss: float = 0.0
    adv_loss: float = 0.0
    disc_loss: float = 0.0
    uplink_bytes: int = 0
    downlink_bytes: int = 0
    participated: bool = True

    def __post_init__(self):
        for name in ('seg_loss', 'adv_loss', 'disc_loss'):
            if not math.isfinite(getattr(self, name)):
                raise ProtocolError('client %d reported a non-finite %s' % (self.client_id, name))


@dataclasses.dataclass(frozen=True)
class RoundReport:
    round: int
    clients: List[ClientReport]
    metrics: ClassMetrics
    uplink_bytes: int
    downlink_bytes: int

    def mean_losses(self) -> Tuple[float, float, float]:
        active = [c for c in self.clients if c.participated] or self.clients
        return (
            float(np.mean([c.seg_loss for c in active])),
            float(np.mean([c.adv_loss for c in active])),
            float(np.mean([c.disc_loss for c in active]))
        )


@dataclasses.dataclass(frozen=True)
class AlgoConfig:
    """
    Protocol-level settings of an experiment.

        aggregator      'auto' picks the algorithm's own rule; any
                        registered name composes with any training
                        mode (krum + fedda_cyclic, ...)
        adv_clients     client ids allowed to run adversarial terms,
                        None for all
        threads         clients trained concurrently per round
    """

    algorithm: Algorithm
    num_clients: int
    model: ModelConfig = dataclasses.field(default_factory=ModelConfig)
    train: LocalTrainConfig = dataclasses.field(default_factory=LocalTrainConfig)
    aggregator: str = 'auto'
    krum_f: int = 1
    participation: float = 1.0
    adv_clients: Optional[Tuple[int, ...]] = None
    seed: int = 42
    threads: int = 1

    def __post_init__(self):
        try:
            algorithm = Algorithm(self.algorithm)
        except ValueError:
            raise EnumValueError(
                'unknown algorithm "%s"; choose from %s' % (self.algorithm, [a.value for a in Algorithm])
            ) from None
        mode, default_aggregator = algorithms[algorithm]
        object.__setattr__(self, 'algorithm', algorithm)
        if self.train.mode != mode:
            object.__setattr__(self, 'train', dataclasses.replace(self.train, mode=mode))
        if self.aggregator == 'auto':
            object.__setattr__(self, 'aggregator', default_aggregator)
        get_aggregator(self.aggregator)
        if self.num_clients < 1:
            raise ValueRangeError('num_clients must be >= 1, got %d' % (self.num_clients,))
        if not 0 < self.participation <= 1:
            raise ValueRangeError('participation must be in (0, 1], got %r' % (self.participation,))
        if self.aggregator == 'krum' and self.participants_per_round < self.krum_f + 3:
            raise ValueRangeError(
                'krum needs at least krum_f + 3 = %d clients per round, got %d'
                % (self.krum_f + 3, self.participants_per_round)
            )
        if self.adv_clients is not None:
            bad = [c for c in self.adv_clients if not 1 <= c <= self.num_clients]
            if bad:
                raise ValueRangeError('adv_clients %s are not client ids in 1..%d' % (bad, self.num_clients))
        if self.threads < 1:
            raise ValueRangeError('threads must be >= 1, got %d' % (self.threads,))

    @property
    def mode(self) -> TrainMode:
        return self.train.mode

    @property
    def participants_per_round(self) -> int:
        return math.ceil(self.participation * self.num_clients)

    def adversarial_for(self, client_id: int) -> bool:
        return self.adv_clients is None or client_id in self.adv_clients


def cyclic_target(source_id: int, n_clients: int) -> int:
    """
    Client that consumes the features of `source_id`:
    (source mod N) + 1.

        >>> [cyclic_target(k, 3) for k in (1, 2, 3)]
        [2, 3, 1]
    """

    if n_clients < 1 or not 1 <= source_id <= n_clients:
        raise ProtocolError('source id %d is outside 1..%d' % (source_id, n_clients))
    return source_id % n_clients + 1


def cyclic_source(target_id: int, n_clients: int) -> int:
    """
    Inverse of `cyclic_target`.
    """

    if n_clients < 1 or not 1 <= target_id <= n_clients:
        raise ProtocolError('target id %d is outside 1..%d' % (target_id, n_clients))
    return (target_id - 2) % n_clients + 1


def account_payload(algorithm: Algorithm, cfg: ModelConfig, bank_size: int) -> int:
    """
    Predicted uplink bytes of one client in one round: the serialized
    segmentation group, plus `bank_size` raw feature maps for
    fedda_cyclic.
    """

    shapes = cfg.param_shapes()
    arrays = {
        name: np.empty(shape)
        for group in segmentation_groups
        for name, shape in shapes[group].items()
    }
    total = ParamSerializer().size(arrays)
    if algorithms[Algorithm(algorithm)][0] == TrainMode.CYCLIC:
        total += FeatureSerializer(cfg.feature_shape).size(bank_size)
    return total


class BaseTransport:
    """
    Base class for the channel between server and clients.
    """

    def broadcast(self, client_id: int, arrays: Mapping[str, FloatArray]) -> Dict[str, FloatArray]:
        raise NotImplementedError

    def deliver(self, client_id: int, maps: Sequence[FeatureMap]) -> List[FeatureMap]:
        raise NotImplementedError

    def upload_params(self, client_id: int, arrays: Mapping[str, FloatArray]) -> Dict[str, FloatArray]:
        raise NotImplementedError

    def upload_features(self, client_id: int, maps: Sequence[FeatureMap]) -> List[FeatureMap]:
        raise NotImplementedError


class InMemoryTransport(BaseTransport):
    """
    Moves payloads by encoding and decoding them with the wire
    serializers, so byte counts are measured rather than estimated
    and nothing received shares memory with what was sent.

    Only segmentation parameters and FeatureMaps are accepted;
    anything else (samples, masks, discriminator tensors) is a
    ProtocolError.
    """

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.params_codec = ParamSerializer()
        self.feature_codec = FeatureSerializer(cfg.feature_shape)
        self.uplink: Dict[int, int] = {}
        self.downlink: Dict[int, int] = {}

    def reset(self):
        self.uplink.clear()
        self.downlink.clear()

    def _count(self, table, client_id, size):
        table[client_id] = table.get(client_id, 0) + size

    def _check_params(self, arrays):
        if not isinstance(arrays, Mapping):
            raise ProtocolError('parameter payload must be a name -> array mapping, got %s' % (type(arrays).__name__,))
        for name, value in arrays.items():
            if not isinstance(name, str) or name.split('.', 1)[0] not in segmentation_groups:
                raise ProtocolError('"%s" may not cross the network' % (name,))
            if not isinstance(value, np.ndarray):
                raise ProtocolError('"%s" is a %s, not an array' % (name, type(value).__name__))

    def _check_maps(self, maps):
        for fmap in maps:
            if not isinstance(fmap, FeatureMap):
                raise ProtocolError('feature payload holds a %s, not a FeatureMap' % (type(fmap).__name__,))

    def _send_params(self, table, client_id, arrays):
        self._check_params(arrays)
        raw = self.params_codec.dumps(arrays)
        self._count(table, client_id, len(raw))
        return self.params_codec.loads(raw)

    def _send_maps(self, table, client_id, maps):
        self._check_maps(maps)
        raw = self.feature_codec.dumps([m.data for m in maps])
        self._count(table, client_id, len(raw))
        return [
            FeatureMap(data, m.client_id, m.round)
            for data, m in zip(self.feature_codec.loads(raw), maps)
        ]

    def broadcast(self, client_id, arrays):
        return self._send_params(self.downlink, client_id, arrays)

    def deliver(self, client_id, maps):
        return self._send_maps(self.downlink, client_id, maps)

    def upload_params(self, client_id, arrays):
        return self._send_params(self.uplink, client_id, arrays)

    def upload_features(self, client_id, maps):
        return self._send_maps(self.uplink, client_id, maps)


def select_participants(algo: AlgoConfig, round: int) -> List[int]:
    """
    Ascending ids of the clients taking part in `round`. With partial
    participation the subset is drawn from the server's stream.
    """

    ids = list(range(1, algo.num_clients + 1))
    count = algo.participants_per_round
    if count >= algo.num_clients:
        return ids
    rng = SeedStream(algo.seed, seed_namespaces['server']).spawn(round)
    return sorted(int(i) + 1 for i in rng.choice(algo.num_clients, size=count, replace=False))


def run_round(
    server: ServerState,
    clients: Sequence[ClientState],
    algo: AlgoConfig,
    order: Optional[Sequence[int]] = None,
    transport: Optional[BaseTransport] = None
) -> Tuple[ServerState, List[ClientState], RoundReport]:
    """
    One synchronous round.

        1. broadcast the global segmentation parameters
        2. cyclic mode: deliver bank features from each client's
           cyclic predecessor (uploaded last round)
        3. local training
        4. upload segmentation parameters (and bank features)
        5. aggregate in ascending client id with weights |D_k|
        6. evaluate the new global model on the global test set
        7. account payload bytes

    Parameters:

        :param order (list of int):
            Execution order of local training. Results do not depend
            on it; it exists to check exactly that.

        :param transport (BaseTransport):
            Defaults to a fresh InMemoryTransport.

    Return:

        The updated server, the clients in ascending id, the report.
    """

    if len(clients) != algo.num_clients:
        raise ProtocolError('expected %d clients, got %d' % (algo.num_clients, len(clients)))
    by_id = {c.client_id: c for c in clients}
    if sorted(by_id) != list(range(1, algo.num_clients + 1)):
        raise ProtocolError('client ids must be exactly 1..%d, got %s' % (algo.num_clients, sorted(by_id)))

    transport = transport or InMemoryTransport(algo.model)
    if isinstance(transport, InMemoryTransport):
        transport.reset()

    n, rnd = algo.num_clients, server.round
    participants = select_participants(algo, rnd)
    cyclic = algo.mode == TrainMode.CYCLIC

    inputs: Dict[int, RoundInputs] = {}
    for cid in participants:
        delivery = []
        if cyclic and n > 1:
            source = cyclic_source(cid, n)
            if source in server.feature_bank:
                delivery = transport.deliver(cid, server.feature_bank[source])
        inputs[cid] = RoundInputs(
            round=rnd,
            global_params=transport.broadcast(cid, server.global_params),
            delivery=delivery,
            adversarial=algo.adversarial_for(cid) and not (cyclic and n == 1)
        )

    run_order = list(order) if order is not None else participants
    if sorted(run_order) != participants:
        raise ProtocolError('execution order %s does not match participants %s' % (run_order, participants))

    def train(cid):
        return cid, local_train(by_id[cid], inputs[cid], algo.train)[1]

    if algo.threads > 1:
        with ThreadPoolExecutor(max_workers=algo.threads) as pool:
            losses = dict(pool.map(train, run_order))
    else:
        losses = dict(train(cid) for cid in run_order)

    vectors, weights, bank = [], [], {}
    seg_names = by_id[participants[0]].params.names(segmentation_groups)
    for cid in participants:
        client = by_id[cid]
        received = transport.upload_params(cid, client.params.segmentation())
        vectors.append(np.concatenate([received[name].ravel() for name in seg_names]))
        weights.append(len(client.dataset))
        if cyclic:
            maps = sample_bank_features(client, rnd, algo.train.bank_size)
            bank[cid] = transport.upload_features(cid, maps)

    aggregator = get_aggregator(algo.aggregator)
    vector = aggregator.aggregate(
        AggregationInput(vectors=vectors, weights=weights, client_ids=participants, krum_f=algo.krum_f)
    )
    template = by_id[participants[0]].params
    server.global_params = template.unflatten_segmentation(vector).segmentation()
    server.feature_bank = bank

    metrics = evaluate_global(server.model(), server.global_test, algo.model)

    up = getattr(transport, 'uplink', {})
    down = getattr(transport, 'downlink', {})
    reports = []
    for cid in range(1, n + 1):
        if cid in losses:
            s = losses[cid]
            reports.append(ClientReport(
                cid, s.seg_loss, s.adv_loss, s.disc_loss,
                up.get(cid, 0), down.get(cid, 0), True
            ))
        else:
            reports.append(ClientReport(cid, participated=False))

    report = RoundReport(
        round=rnd,
        clients=reports,
        metrics=metrics,
        uplink_bytes=sum(r.uplink_bytes for r in reports),
        downlink_bytes=sum(r.downlink_bytes for r in reports)
    )
    server.uplink_bytes += report.uplink_bytes
    server.downlink_bytes += report.downlink_bytes
    server.round += 1

    logger.info(
        'round {r}: dice={d:.4f} hd95={h:.3f} up={u}B down={w}B',
        r=rnd, d=metrics.mean_dice, h=metrics.mean_hd95,
        u=report.uplink_bytes, w=report.downlink_bytes
    )
    return server, [by_id[cid] for cid in range(1, n + 1)], report
