"""Command-line front end.

Subcommands:

    pcnet train  --config cfg.yaml --data DIR --out ckpt.pcn --trace trace.csv
    pcnet eval   --checkpoint ckpt.pcn --data DIR --mode MODE [--seed N]
    pcnet verify [--trials N] [--seed N]
    pcnet synth  --classes N --per-class N --out DIR [--separation F] [--seed N]

Exit codes: 0 success, 1 configuration / checkpoint error, 2 data error,
3 numeric divergence, 4 gradient-oracle disagreement.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import yaml

from . import checkpoint, data, kernels, verify
from .checkpoint import CheckpointError
from .data import DataError, Dataset
from .errors import ConfigError, DivergenceError, PcnError
from .inference import InferenceSettings
from .learning import LearnSettings
from .training import EVAL_MODES, TrainConfig, evaluate, train

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3
EXIT_ORACLE = 4


def _resolve_threads(args) -> None:
    n = args.threads
    if n is None:
        n = int(os.environ.get("PCN_THREADS", "0") or "0")
    kernels.set_threads(n)


def _load_train_config(path, seed_override=None) -> TrainConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    cfg = TrainConfig.from_dict(raw)
    if seed_override is not None:
        cfg = dataclasses.replace(cfg, seed=seed_override)
    return cfg


def _load_dir(data_dir, want_test=False) -> Dataset:
    paths = data.test_files(data_dir) if want_test else data.train_files(data_dir)
    missing = [p for p in paths if not os.path.exists(p)]
    if missing or not paths:
        raise DataError(f"no usable data under {data_dir!r}"
                        + (f" (missing {', '.join(missing)})" if missing else ""))
    return data.load_cifar10(paths)


def cmd_train(args) -> int:
    try:
        cfg = _load_train_config(args.config, args.seed)
    except (OSError, ConfigError, yaml.YAMLError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        dataset = _load_dir(args.data)
    except (OSError, DataError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA

    def report(epoch, mean_final_energy, wall_s):
        print(f"epoch={epoch} mean_final_energy={mean_final_energy:.9g} "
              f"wall_s={wall_s:.3f}")

    try:
        stack, trace = train(cfg, dataset, on_epoch=report)
    except DivergenceError as err:
        print(f"divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        checkpoint.save(stack, cfg.model, args.out)
    if args.trace:
        trace.write_csv(args.trace)
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        stack, model_cfg = checkpoint.load(args.checkpoint)
    except (OSError, CheckpointError) as err:
        print(f"checkpoint error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        dataset = _load_dir(args.data, want_test=True)
    except (OSError, DataError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    modes = list(EVAL_MODES) if args.mode == "both" else [args.mode]
    for mode in modes:
        cfg = TrainConfig(model=model_cfg,
                          infer=InferenceSettings(t_infer=args.t_infer,
                                                  eta_infer=args.eta_infer),
                          learn=LearnSettings(),
                          batch_size=args.batch_size, epochs=1,
                          seed=args.seed, eval_mode=mode)
        rep = evaluate(stack, cfg, dataset, seed=args.seed)
        print(f"top1={rep.top1:.6f} top3={rep.top3:.6f} mode={rep.mode} "
              f"samples={rep.samples}")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify.gradient_check(seed=args.seed, trials=args.trials)
    print(f"trials={report.trials} max_rel_latent={report.max_rel_latent:.3g} "
          f"max_rel_weight={report.max_rel_weight:.3g} "
          f"max_rel_readout={report.max_rel_readout:.3g}")
    if report.ok:
        print(f"gradient oracle agreement OK (rel err < {verify.REL_TOL:g})")
        return EXIT_OK
    for f in report.failures[:10]:
        print(f"DISAGREEMENT case={f.case} kind={f.kind} layer={f.layer} "
              f"entry={f.entry} analytic={f.analytic:.9g} fd={f.fd:.9g} "
              f"rel_err={f.rel_err:.3g}", file=sys.stderr)
    return EXIT_ORACLE


def cmd_synth(args) -> int:
    try:
        dataset = data.synth_blobs(args.classes, args.per_class, data.PIXELS,
                                   args.separation, args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    n = len(dataset)
    written = []
    if args.as_test:
        path = os.path.join(args.out, "test_batch.bin")
        data.save_cifar10(dataset, path)
        written.append(path)
    else:
        chunk = 10000
        for i, start in enumerate(range(0, n, chunk), start=1):
            part = Dataset(dataset.inputs[start:start + chunk],
                           dataset.labels[start:start + chunk])
            path = os.path.join(args.out, f"data_batch_{i}.bin")
            data.save_cifar10(part, path)
            written.append(path)
    print(f"wrote {n} records across {len(written)} file(s) in {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcnet",
                                description="Predictive coding network engine")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train on CIFAR-10 binary files")
    t.add_argument("--config", required=True, help="YAML training config")
    t.add_argument("--data", required=True, help="directory with data_batch_*.bin")
    t.add_argument("--out", help="checkpoint output path")
    t.add_argument("--trace", help="energy trace CSV output path")
    t.add_argument("--seed", type=int, help="override the config seed")
    t.add_argument("--threads", type=int, help="kernel worker count (0 = auto)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on test_batch.bin")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--mode", default="unsupervised_inference",
                   choices=list(EVAL_MODES) + ["both"])
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--batch-size", type=int, default=500)
    e.add_argument("--t-infer", type=int, default=50)
    e.add_argument("--eta-infer", type=float, default=0.05)
    e.add_argument("--threads", type=int)
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="gradient oracle agreement suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--threads", type=int)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("synth", help="write a synthetic dataset in the "
                                     "CIFAR-10 binary layout")
    s.add_argument("--classes", type=int, required=True)
    s.add_argument("--per-class", type=int, required=True)
    s.add_argument("--separation", type=float, default=4.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--as-test", action="store_true",
                   help="write a single test_batch.bin instead of train chunks")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _resolve_threads(args)
    try:
        return args.func(args)
    except PcnError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
