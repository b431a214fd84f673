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
Client-local training: the segmentation loss plus feature-level
adversarial alignment.

Per batch the discriminator is updated first, on detached source
features (label 0) and target features (label 1). Then the backbone
and decoder are updated on cross-entropy plus λ·BCE(D(B(x)), 1),
the non-saturating form of the backbone's side of the min-max game.
"""

import dataclasses
import numpy as np
from fedda.aggregator import proximal_term
from fedda.autodiff import (
    AdamState,
    Tape,
    adam_step,
    binary_cross_entropy,
    mean_of,
    softmax_cross_entropy
)
from fedda.errors import ConfigError, ProtocolError, ShapeError
from fedda.logger import logger
from fedda.model import (
    FeatureMap,
    Params,
    decode,
    discriminate,
    extract_features,
    segmentation_groups
)
from fedda.types import (
    TYPE_CHECKING,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
    TrainMode,
    FloatArray
)
from fedda.utils import batched

if TYPE_CHECKING:
    from fedda.server import ClientState
    from fedda.data import Sample

#: Sub-stream ids of a client's per-round seed stream.
DATA_STREAM = 0
DISC_STREAM = 1

#: Valid `joint_targets` values.
joint_schedules = ('batch', 'round')


@dataclasses.dataclass(frozen=True)
class LocalTrainConfig:
    lr_backbone: float = 1e-3
    lr_discriminator: float = 1e-6
    adv_weight: float = 0.1
    local_epochs: int = 1
    batch_size: int = 4
    weight_decay: float = 1e-5
    disc_weight_decay: float = 1e-5
    mode: TrainMode = TrainMode.PLAIN
    fedprox_mu: float = 0.01
    bank_size: int = 4
    joint_targets: str = 'batch'

    def __post_init__(self):
        object.__setattr__(self, 'mode', TrainMode(self.mode))
        if self.lr_backbone <= 0 or self.lr_discriminator <= 0:
            raise ConfigError('learning rates must be positive')
        if self.adv_weight < 0:
            raise ConfigError('adv_weight must be >= 0, got %r' % (self.adv_weight,))
        if self.local_epochs < 1:
            raise ConfigError('local_epochs must be >= 1, got %r' % (self.local_epochs,))
        if self.batch_size < 1:
            raise ConfigError('batch_size must be >= 1, got %r' % (self.batch_size,))
        if self.weight_decay < 0 or self.disc_weight_decay < 0:
            raise ConfigError('weight decay must be >= 0')
        if self.fedprox_mu < 0:
            raise ConfigError('fedprox_mu must be >= 0, got %r' % (self.fedprox_mu,))
        if self.bank_size < 1:
            raise ConfigError('bank_size must be >= 1, got %r' % (self.bank_size,))
        if self.joint_targets not in joint_schedules:
            raise ConfigError('joint_targets must be one of %s, got %r' % (joint_schedules, self.joint_targets))

    @property
    def adversarial(self) -> bool:
        return self.mode in (TrainMode.CYCLIC, TrainMode.JOINT)

    def seg_optimizer(self) -> AdamState:
        return AdamState(lr=self.lr_backbone, weight_decay=self.weight_decay)

    def disc_optimizer(self) -> AdamState:
        return AdamState(lr=self.lr_discriminator, weight_decay=self.disc_weight_decay)


@dataclasses.dataclass
class RoundInputs:
    """
    What a client receives at the start of a round.

        global_params   the broadcast segmentation group
        delivery        bank features routed to this client (cyclic)
        adversarial     False switches the adversarial terms off for
                        this client (single-client ablations)
    """

    round: int
    global_params: Dict[str, FloatArray]
    delivery: List[FeatureMap] = dataclasses.field(default_factory=list)
    adversarial: bool = True


@dataclasses.dataclass(frozen=True)
class LossSummary:
    seg_loss: float = 0.0
    adv_loss: float = 0.0
    disc_loss: float = 0.0
    batches: int = 0
    targets: int = 0


def acquire_targets_joint(
    snapshot: Params,
    local_batch: Sequence['Sample'],
    round: int = 0
) -> List[FeatureMap]:
    """
    Features of the frozen round-start global model on the local
    batch. Computed outside any tape, so they are detached.
    """

    return [
        FeatureMap(extract_features(snapshot, sample.image).data, client_id=0, round=round)
        for sample in local_batch
    ]


def acquire_targets_cyclic(
    client: 'ClientState',
    bank_delivery: Sequence[FeatureMap],
    feature_shape: Optional[Tuple[int, ...]] = None
) -> List[FeatureMap]:
    """
    Fix the delivered bank features as the client's targets for the
    whole round. An empty delivery (round 0) leaves the client
    without targets, which disables the adversarial terms.
    """

    for fmap in bank_delivery:
        if feature_shape is not None and fmap.shape != tuple(feature_shape):
            raise ShapeError('delivered feature map has shape %s, model produces %s' % (fmap.shape, feature_shape))

    client.target_features = list(bank_delivery)
    return client.target_features


def discriminator_step(
    client: 'ClientState',
    source_feats: Sequence[FloatArray],
    target_feats: Sequence[FloatArray],
) -> float:
    """
    One Adam step on the client's discriminator with

        L_D = 1/(n_s + n_t) [Σ BCE(D(F_s), 0) + Σ BCE(D(F_t), 1)]

    Only discriminator tensors are trainable, so the segmentation
    group is untouched. Returns L_D, or 0.0 when either side is
    empty (the step is skipped).
    """

    if not len(source_feats) or not len(target_feats):
        return 0.0
    shapes = sorted({np.shape(f) for f in list(source_feats) + list(target_feats)})
    if len(shapes) != 1:
        raise ShapeError('source and target feature maps differ in shape: %s' % (shapes,))

    params = client.params.bind(trainable=('discriminator',))
    with Tape() as tape:
        terms = [binary_cross_entropy(discriminate(params, f), 0.0) for f in source_feats]
        terms += [binary_cross_entropy(discriminate(params, f), 1.0) for f in target_feats]
        loss = mean_of(terms)
    tape.backward(loss)

    group = {name: params[name] for name in client.params.names('discriminator')}
    updated, client.disc_opt = adam_step(group, client.disc_opt)
    client.params = client.params.replace(updated)
    return loss.item()


def backbone_adversarial_step(
    client: 'ClientState',
    batch: Sequence['Sample'],
    cfg: LocalTrainConfig,
    adversarial: bool = False,
    global_ref: Optional[Dict[str, FloatArray]] = None
) -> Tuple[float, float]:
    """
    One Adam step on backbone + decoder.

        total = CE(segment(x), y) + λ·BCE(D(B(x)), 1)     (adversarial)
        total = CE(segment(x), y) + (mu/2)‖θ − θ_g‖²      (fedprox)

    Discriminator tensors are constants here. With λ = 0 the
    adversarial term never enters the graph, so the step is exactly
    the plain cross-entropy step.

    Return:

        (seg_loss, adv_loss) as floats; adv_loss is 0.0 when the
        adversarial term is off.
    """

    params = client.params.bind(trainable=segmentation_groups)
    seg_names = client.params.names(segmentation_groups)

    with Tape() as tape:
        seg_terms, adv_terms = [], []
        for sample in batch:
            features = extract_features(params, sample.image)
            seg_terms.append(softmax_cross_entropy(decode(params, features), sample.mask))
            if adversarial:
                adv_terms.append(binary_cross_entropy(discriminate(params, features), 1.0))

        seg_loss = mean_of(seg_terms)
        total = seg_loss
        adv_loss = mean_of(adv_terms) if adv_terms else None
        if adv_loss is not None and cfg.adv_weight > 0:
            total = total + adv_loss * cfg.adv_weight
        if cfg.mode == TrainMode.FEDPROX and cfg.fedprox_mu > 0:
            if global_ref is None:
                raise ProtocolError('fedprox needs the broadcast parameters as reference')
            total = total + proximal_term(
                [params[n] for n in seg_names],
                [global_ref[n] for n in seg_names],
                cfg.fedprox_mu
            )
    tape.backward(total)

    group = {name: params[name] for name in seg_names}
    updated, client.seg_opt = adam_step(group, client.seg_opt)
    client.params = client.params.replace(updated)
    return seg_loss.item(), (adv_loss.item() if adv_loss is not None else 0.0)


def local_train(
    client: 'ClientState',
    round_inputs: RoundInputs,
    cfg: LocalTrainConfig
) -> Tuple['ClientState', LossSummary]:
    """
    Run the local epochs of one round on `client`, in place.

    For each epoch the dataset is shuffled with the client's data
    stream for this round and cut into batches. Per batch: refresh
    targets (joint mode), step the discriminator, step the backbone.

    Parameters:

        :param client (ClientState):
            The client; its params, optimizers and targets are updated.

        :param round_inputs (RoundInputs):
            Broadcast parameters, bank delivery, ablation switch.

        :param cfg (LocalTrainConfig):
            Learning rates, λ, schedule and training mode.

    Return:

        The same client and the mean losses over all batches.
    """

    if not client.dataset:
        raise ProtocolError('client %d has an empty local dataset' % (client.client_id,))

    round = round_inputs.round
    client.params = client.params.replace(round_inputs.global_params)
    global_ref = {k: np.array(v) for k, v in round_inputs.global_params.items()}
    adversarial = cfg.adversarial and round_inputs.adversarial

    snapshot = client.params.bind() if cfg.mode == TrainMode.JOINT else None
    targets: List[FeatureMap] = []
    if cfg.mode == TrainMode.CYCLIC:
        feature_shape = client.params['backbone.conv2.weight'].shape[:1] + client.dataset[0].image.shape[1:]
        targets = acquire_targets_cyclic(client, round_inputs.delivery, feature_shape)
    elif cfg.mode == TrainMode.JOINT and cfg.joint_targets == 'round':
        targets = acquire_targets_joint(snapshot, client.dataset, round)
        client.target_features = targets
    else:
        client.target_features = []

    data_rng = client.rng.spawn(round, DATA_STREAM)
    seg_losses, adv_losses, disc_losses = [], [], []

    for _ in range(cfg.local_epochs):
        order = data_rng.permutation(len(client.dataset))
        for indices in batched(order, cfg.batch_size):
            batch = [client.dataset[i] for i in indices]

            if cfg.mode == TrainMode.JOINT and cfg.joint_targets == 'batch':
                targets = acquire_targets_joint(snapshot, batch, round)
                client.target_features = targets

            use_adv = adversarial and bool(targets)
            if use_adv:
                current = client.params.bind()
                source = [extract_features(current, s.image).data for s in batch]
                disc_losses.append(discriminator_step(client, source, [t.data for t in targets]))

            seg, adv = backbone_adversarial_step(
                client, batch, cfg, adversarial=use_adv, global_ref=global_ref
            )
            seg_losses.append(seg)
            adv_losses.append(adv)

    summary = LossSummary(
        seg_loss=float(np.mean(seg_losses)),
        adv_loss=float(np.mean(adv_losses)),
        disc_loss=float(np.mean(disc_losses)) if disc_losses else 0.0,
        batches=len(seg_losses),
        targets=len(client.target_features)
    )
    logger.debug(
        'client {c} round {r}: seg={s:.4f} adv={a:.4f} disc={d:.4f} targets={t}',
        c=client.client_id, r=round, s=summary.seg_loss, a=summary.adv_loss,
        d=summary.disc_loss, t=summary.targets
    )
    return client, summary


def sample_bank_features(client: 'ClientState', round: int, bank_size: int) -> List[FeatureMap]:
    """
    Detached features of `bank_size` local images chosen with the
    client's discriminator-side stream, for upload to the bank.
    """

    rng = client.rng.spawn(round, DISC_STREAM)
    n = len(client.dataset)
    picks = rng.choice(n, size=bank_size, replace=bank_size > n)
    current = client.params.bind()
    return [
        FeatureMap(extract_features(current, client.dataset[int(i)].image).data, client.client_id, round)
        for i in picks
    ]
