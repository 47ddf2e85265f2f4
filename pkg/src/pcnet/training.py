"""Epoch/batch orchestration of the alternating scheme, plus evaluation.

Per batch: clamp the inputs, draw fresh latents, settle them with the
supervised inference loop, then run the weight-update loop on the frozen
latents. Energies are recorded at every step; the whole run is a pure
function of (config, dataset).

Evaluation freezes the weights and settles fresh latents per test batch.
Two protocols exist:

* ``unsupervised_inference`` (default): no label information enters the
  inference loop (the top error signal is zero). This is the only mode
  that measures generalization without label leakage.
* ``label_clamped``: the true label's supervised error participates in
  test-time inference. Diagnostic only; its scores are not comparable to
  standard test accuracy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .data import BatchPlan, Dataset, batches, one_hot
from .energy import PHASE_INFER, PHASE_LEARN, EnergyTrace, record
from .errors import ConfigError, DivergenceError
from .inference import EarlyStop, InferenceSettings, run_inference
from .learning import LearnSettings, run_learning
from .model import (GenerativeStack, ModelConfig, derive_seed, init_latents,
                    init_weights)

EVAL_MODES = ("unsupervised_inference", "label_clamped")


@dataclass(frozen=True)
class TrainConfig:
    model: ModelConfig
    infer: InferenceSettings
    learn: LearnSettings
    batch_size: int
    epochs: int
    seed: int = 0
    eval_mode: str = "unsupervised_inference"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.eval_mode not in EVAL_MODES:
            raise ConfigError(f"eval_mode must be one of {EVAL_MODES}, "
                              f"got {self.eval_mode!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        """Build from a parsed config file (nested plain dicts)."""
        try:
            model = ModelConfig(
                dims=tuple(raw["model"]["dims"]),
                output_dim=int(raw["model"]["output_dim"]),
                activation=raw["model"].get("activation", "relu"),
                latent_init_scale=float(raw["model"].get("latent_init_scale", 1.0)),
            )
            es = raw["infer"].get("early_stop")
            early = None
            if es:
                early = EarlyStop(threshold=float(es["threshold"]),
                                  patience=int(es.get("patience", 1)))
            infer = InferenceSettings(t_infer=int(raw["infer"]["t_infer"]),
                                      eta_infer=float(raw["infer"]["eta_infer"]),
                                      early_stop=early)
            t_learn = raw.get("learn", {}).get("t_learn")
            learn = LearnSettings(
                t_learn=None if t_learn is None else int(t_learn),
                eta_learn=float(raw.get("learn", {}).get("eta_learn", 0.005)))
            return cls(model=model, infer=infer, learn=learn,
                       batch_size=int(raw["batch_size"]),
                       epochs=int(raw["epochs"]),
                       seed=int(raw.get("seed", 0)),
                       eval_mode=raw.get("eval_mode", "unsupervised_inference"))
        except KeyError as missing:
            raise ConfigError(f"config file is missing {missing}") from None


@dataclass(frozen=True)
class EvalReport:
    top1: float
    top3: float
    per_class_counts: tuple
    samples: int
    mode: str


def top_k_hit(y_hat: np.ndarray, label: int, k: int) -> bool:
    """True iff `label` is among the k largest entries of the score row.

    Ties break toward the lowest index, so results are exact and
    deterministic.
    """
    y_hat = np.asarray(y_hat).ravel()
    if k > y_hat.size:
        raise ConfigError(f"k={k} exceeds {y_hat.size} classes")
    order = np.argsort(-y_hat, kind="stable")
    return int(label) in order[:k]


def train(config: TrainConfig, dataset: Dataset,
          on_epoch: Optional[Callable[[int, float, float], None]] = None,
          ) -> Tuple[GenerativeStack, EnergyTrace]:
    """Full training run; deterministic in config.seed.

    Shuffling reseeds per epoch with seed XOR epoch; fresh latents are
    drawn per batch from a (seed, epoch, batch) derived stream. `on_epoch`
    is called after each epoch with (epoch, mean final batch energy,
    seconds elapsed for the epoch).
    """
    if dataset.input_dim != config.model.dims[0]:
        raise ConfigError(f"dataset width {dataset.input_dim} does not match "
                          f"model d_0 = {config.model.dims[0]}")
    stack = init_weights(config.model, config.seed)
    trace = EnergyTrace()
    num_classes = config.model.output_dim
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        final_energies = []
        plan = BatchPlan.shuffled(len(dataset), config.batch_size,
                                  seed=config.seed ^ epoch)
        for batch_index, (inputs, labels) in enumerate(batches(dataset, plan)):
            targets = one_hot(labels, num_classes)
            latents = init_latents(config.model, inputs.shape[0],
                                   seed=derive_seed(config.seed, epoch, batch_index))
            try:
                latents, infer_e, steps = run_inference(
                    stack, inputs, latents, targets, config.infer)
                for t, e in enumerate(infer_e):
                    record(trace, epoch, batch_index, t, PHASE_INFER, e)
                stack, learn_e = run_learning(
                    stack, inputs, latents, targets, config.learn)
                # learn_e[0] equals the last inference energy (same weights,
                # same latents); skip it to keep one record per step index.
                for t, e in enumerate(learn_e[1:], start=1):
                    record(trace, epoch, batch_index, steps + t, PHASE_LEARN, e)
            except DivergenceError as err:
                err.epoch = epoch
                err.batch = batch_index
                raise
            final_energies.append(learn_e[-1])
        if on_epoch is not None:
            on_epoch(epoch, float(np.mean(final_energies)),
                     time.perf_counter() - t0)
    return stack, trace


def evaluate(stack: GenerativeStack, config: TrainConfig, dataset: Dataset,
             seed: Optional[int] = None) -> EvalReport:
    """Frozen-weight evaluation under config.eval_mode.

    Batches run in dataset order (a final partial batch covers the tail),
    each with fresh latents from a fixed eval seed, so repeated calls
    reproduce the same report bit for bit.
    """
    mode = config.eval_mode
    num_classes = config.model.output_dim
    if len(dataset) and int(dataset.labels.max()) >= num_classes:
        raise ConfigError(f"dataset has label {int(dataset.labels.max())} but "
                          f"the model scores {num_classes} classes")
    eval_seed = config.seed if seed is None else seed
    k3 = min(3, num_classes)
    hits1 = hits3 = 0
    per_class = np.zeros(num_classes, dtype=np.int64)
    plan = BatchPlan.ordered(len(dataset), config.batch_size)
    for batch_index, (inputs, labels) in enumerate(batches(dataset, plan)):
        latents = init_latents(config.model, inputs.shape[0],
                               seed=derive_seed(eval_seed, 1, batch_index))
        targets = one_hot(labels, num_classes) if mode == "label_clamped" else None
        settled, _, _ = run_inference(stack, inputs, latents, targets, config.infer)
        scores = settled.x[-1] @ stack.readout.T
        for row, label in zip(scores, labels):
            per_class[label] += 1
            hits1 += top_k_hit(row, label, 1)
            hits3 += top_k_hit(row, label, k3)
    samples = int(per_class.sum())
    return EvalReport(top1=hits1 / samples, top3=hits3 / samples,
                      per_class_counts=tuple(int(c) for c in per_class),
                      samples=samples, mode=mode)
