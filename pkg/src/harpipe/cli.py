"""Command-line front end: train, classify, evaluate, synth, sweep.

Reports go to stdout, progress/log lines to stderr. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bgmodel, goodfeat, lkflow, mlp, pipeline, synth
from .config import PipelineConfig, load_config
from .flowdesc import DESCRIPTOR_DIM
from .frameio import EmptySequenceError, encode_pgm, load_sequence
from .mlp import ACTION_LABELS


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_cfg(args) -> PipelineConfig:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    try:
        return load_config(args.config, overrides)
    except (OSError, ValueError) as e:
        raise UsageError(str(e)) from None


def _class_sequence_dirs(root: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for label in ACTION_LABELS:
        class_dir = os.path.join(root, label)
        if not os.path.isdir(class_dir):
            raise DataError(f"missing class directory {class_dir!r}")
        seqs = sorted(
            os.path.join(class_dir, d)
            for d in os.listdir(class_dir)
            if os.path.isdir(os.path.join(class_dir, d))
        )
        out[label] = seqs
    return out


def _load_frames(seq_dir: str, cfg: PipelineConfig, raw: str | None = None):
    try:
        return list(load_sequence(
            seq_dir, working_resolution=cfg.working_resolution, raw=raw
        ))
    except (OSError, EmptySequenceError, ValueError) as e:
        raise DataError(f"{seq_dir}: {e}") from None


def _dataset_samples(dataset_dir: str, cfg: PipelineConfig,
                     feature_size: int | None = None):
    """Extract (values, label index) per window over the class layout."""
    if feature_size is not None and feature_size != cfg.feature_size:
        import dataclasses
        cfg = dataclasses.replace(cfg, feature_size=feature_size)
    inputs = []
    labels = []
    per_class = {}
    for label, seq_dirs in _class_sequence_dirs(dataset_dir).items():
        count = 0
        for seq_dir in seq_dirs:
            frames = _load_frames(seq_dir, cfg)
            for _, sample in pipeline.sequence_samples(frames, cfg, label=label):
                inputs.append(sample.values)
                labels.append(mlp.label_index(label))
                count += 1
        per_class[label] = count
        _log(f"extracted {count} samples from {label}")
    if not inputs:
        raise DataError(f"no samples extracted from {dataset_dir!r}")
    return np.array(inputs), labels, per_class


def _train_model(inputs, labels, cfg: PipelineConfig):
    layer_sizes = [
        cfg.feature_size * DESCRIPTOR_DIM, cfg.hidden_nodes, len(ACTION_LABELS)
    ]
    model = mlp.init_model(
        layer_sizes, seed=cfg.seed, a=cfg.activation_a, beta=cfg.activation_beta
    )
    state = mlp.init_rprop(
        model,
        eta_plus=cfg.rprop_eta_plus, eta_minus=cfg.rprop_eta_minus,
        step_init=cfg.rprop_step_init, step_min=cfg.rprop_step_min,
        step_max=cfg.rprop_step_max,
    )
    trace = mlp.train(model, inputs, labels, epochs=cfg.epochs, rprop=state)
    return model, trace


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    inputs, labels, per_class = _dataset_samples(args.dataset_dir, cfg)
    model, trace = _train_model(inputs, labels, cfg)
    mlp.save_model(model, args.model_out)
    print(f"trained model written to {args.model_out}")
    for label in ACTION_LABELS:
        print(f"samples {label}: {per_class[label]}")
    print(f"samples total: {len(labels)}")
    print(f"epochs: {cfg.epochs}")
    print(f"final loss: {trace[-1]:.6f}" if trace else "final loss: n/a")
    return 0


def cmd_classify(args) -> int:
    cfg = _load_cfg(args)
    try:
        model = mlp.load_model(args.model)
    except (OSError, ValueError) as e:
        raise DataError(str(e)) from None
    frames = _load_frames(args.sequence, cfg, raw=args.raw)
    try:
        predictions = pipeline.classify_sequence(frames, model, cfg)
    except ValueError as e:
        raise DataError(str(e)) from None
    for start, cls, scores in predictions:
        score_text = " ".join(f"{s:.6f}" for s in scores)
        print(f"{start} {ACTION_LABELS[cls]} {score_text}")
    return 0


def format_report(matrix: np.ndarray) -> str:
    """Fixed-width confusion matrix, per-class rates, overall accuracy, plus
    a CSV duplicate. Rows are true classes in the fixed label order."""
    names = [label.capitalize() for label in ACTION_LABELS]
    lines = ["Confusion matrix (rows = true class)"]
    head = f"{'':<10}" + "".join(f"{n:>10}" for n in names)
    lines.append(head)
    for i, n in enumerate(names):
        lines.append(f"{n:<10}" + "".join(f"{int(c):>10}" for c in matrix[i]))
    lines.append("")
    lines.append("Per-class recognition rate")
    row_sums = matrix.sum(axis=1)
    for i, n in enumerate(names):
        rate = 100.0 * matrix[i, i] / row_sums[i] if row_sums[i] else 0.0
        lines.append(f"{n:<10}{rate:>9.1f}%")
    total = matrix.sum()
    overall = 100.0 * np.trace(matrix) / total if total else 0.0
    lines.append(f"{'Overall':<10}{overall:>9.1f}%")
    lines.append("")
    lines.append("csv,true_class," + ",".join(names) + ",rate_percent")
    for i, n in enumerate(names):
        rate = 100.0 * matrix[i, i] / row_sums[i] if row_sums[i] else 0.0
        cells = ",".join(str(int(c)) for c in matrix[i])
        lines.append(f"csv,{n},{cells},{rate:.1f}")
    lines.append(f"csv,overall,,,,,{overall:.1f}")
    return "\n".join(lines)


def evaluate_dataset(test_dir: str, model, cfg: PipelineConfig) -> np.ndarray:
    matrix = np.zeros((len(ACTION_LABELS), len(ACTION_LABELS)), dtype=np.int64)
    class_dirs = _class_sequence_dirs(test_dir)
    if not any(class_dirs.values()):
        raise DataError(f"no sequences under {test_dir!r}")
    for label, seq_dirs in class_dirs.items():
        true_idx = mlp.label_index(label)
        for seq_dir in seq_dirs:
            frames = _load_frames(seq_dir, cfg)
            try:
                predictions = pipeline.classify_sequence(frames, model, cfg)
            except ValueError as e:
                raise DataError(f"{seq_dir}: {e}") from None
            matrix[true_idx, pipeline.majority_label(predictions)] += 1
        _log(f"evaluated {len(seq_dirs)} sequences of {label}")
    return matrix


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args)
    try:
        model = mlp.load_model(args.model)
    except (OSError, ValueError) as e:
        raise DataError(str(e)) from None
    matrix = evaluate_dataset(args.test_dir, model, cfg)
    print(format_report(matrix))
    return 0


def cmd_synth(args) -> int:
    cfg = _load_cfg(args)
    counts = synth.write_corpus(
        args.out_dir, seed=args.seed if args.seed is not None else cfg.seed,
        train_per_class=args.train_per_class, test_per_class=args.test_per_class,
    )
    print(f"wrote {counts['train']} training and {counts['test']} test "
          f"sequences under {args.out_dir}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    values = sorted(set(args.values))
    if len(values) < 2:
        raise UsageError("sweep needs at least two distinct feature sizes")

    # extraction is shared at the largest N: greedy feature selection is a
    # prefix, so a smaller-N sample is the leading 12*N entries
    n_max = max(values)
    inputs, labels, _ = _dataset_samples(args.dataset_dir, cfg, feature_size=n_max)
    test_cache: dict[str, list] = {}
    import dataclasses

    results = {}
    for n in values:
        cfg_n = dataclasses.replace(cfg, feature_size=n)
        sliced = inputs[:, : n * DESCRIPTOR_DIM]
        model, _ = _train_model(sliced, labels, cfg_n)
        matrix = _sweep_evaluate(args.test_dir, model, cfg_n, n_max, test_cache)
        results[n] = matrix
        _log(f"feature size {n}: done")

    names = [label.capitalize() for label in ACTION_LABELS]
    print("Recognition rate (%) by feature size")
    print(f"{'Action':<10}" + "".join(f"{f'N={n}':>10}" for n in values))
    for i, name in enumerate(names):
        row = ""
        for n in values:
            m = results[n]
            rs = m[i].sum()
            row += f"{100.0 * m[i, i] / rs if rs else 0.0:>10.1f}"
        print(f"{name:<10}{row}")
    overall_row = ""
    for n in values:
        m = results[n]
        overall_row += f"{100.0 * np.trace(m) / m.sum():>10.1f}"
    print(f"{'Overall':<10}{overall_row}")
    print("csv,feature_size," + ",".join(str(n) for n in values))
    print("csv,overall_percent,"
          + ",".join(f"{100.0 * np.trace(results[n]) / results[n].sum():.1f}"
                     for n in values))
    return 0


def _sweep_evaluate(test_dir, model, cfg, n_max, cache):
    """Evaluate using cached per-window max-N samples sliced to cfg.feature_size."""
    if not cache:
        for label, seq_dirs in _class_sequence_dirs(test_dir).items():
            seqs = []
            for seq_dir in seq_dirs:
                frames = _load_frames(seq_dir, cfg)
                import dataclasses
                cfg_max = dataclasses.replace(cfg, feature_size=n_max)
                if len(frames) < cfg.window_frames:
                    raise DataError(f"{seq_dir}: sequence shorter than one window")
                samples = pipeline.sequence_samples(frames, cfg_max, label=label)
                seqs.append([s.values for _, s in samples])
            cache[label] = seqs
    matrix = np.zeros((len(ACTION_LABELS), len(ACTION_LABELS)), dtype=np.int64)
    for label, seqs in cache.items():
        true_idx = mlp.label_index(label)
        for windows in seqs:
            preds = []
            for i, values in enumerate(windows):
                cls, scores = mlp.predict(
                    model, values[: cfg.feature_size * DESCRIPTOR_DIM]
                )
                preds.append((i, cls, scores))
            matrix[true_idx, pipeline.majority_label(preds)] += 1
    return matrix


def cmd_dump(args) -> int:
    """Diagnostic exports: foreground masks, features, flow, per the
    --dump-* flags on the shared parser."""
    cfg = _load_cfg(args)
    frames = _load_frames(args.sequence, cfg, raw=args.raw)
    params = pipeline.track_params(cfg)
    if args.dump_masks:
        os.makedirs(args.dump_masks, exist_ok=True)
        model = bgmodel.BackgroundModel(
            frames[0].width, frames[0].height, k=cfg.gmm_components,
            alpha=cfg.gmm_alpha, t=cfg.gmm_threshold,
            match_radius=cfg.gmm_match_radius,
            initial_variance=cfg.gmm_initial_variance,
            variance_floor=cfg.gmm_variance_floor,
        )
        for f in frames:
            mask = model.update_and_classify(f)
            path = os.path.join(args.dump_masks, f"mask_{f.index:05d}.pgm")
            with open(path, "wb") as fh:
                fh.write(encode_pgm(mask.to_frame(f.index)))
    if args.dump_features:
        os.makedirs(args.dump_features, exist_ok=True)
        for f in frames:
            points = goodfeat.detect_good_features(
                f, max_n=cfg.feature_size, quality_rel=cfg.quality_rel,
                min_distance=cfg.min_distance,
                half_window=cfg.tensor_half_window,
            )
            path = os.path.join(args.dump_features, f"features_{f.index:05d}.txt")
            with open(path, "w") as fh:
                for p in points:
                    fh.write(f"{f.index} {p.x} {p.y} {p.score}\n")
    if args.dump_flow:
        os.makedirs(args.dump_flow, exist_ok=True)
        for i in range(0, len(frames) - cfg.flow_step, cfg.flow_step):
            pi = lkflow.build_pyramid(frames[i], cfg.pyramid_levels)
            pj = lkflow.build_pyramid(frames[i + cfg.flow_step], cfg.pyramid_levels)
            points = goodfeat.detect_good_features(
                frames[i], max_n=cfg.feature_size, quality_rel=cfg.quality_rel,
                min_distance=cfg.min_distance,
                half_window=cfg.tensor_half_window,
            )
            path = os.path.join(args.dump_flow, f"flow_{i:05d}.txt")
            with open(path, "w") as fh:
                for p, r in zip(points, lkflow.track_points(pi, pj, points, params)):
                    u = r.dx / cfg.flow_step
                    v = r.dy / cfg.flow_step
                    fh.write(
                        f"{i} {p.x} {p.y} {u} {v} {r.status.value} {r.residual}\n"
                    )
    print("dump complete")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="harpipe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key")

    p = sub.add_parser("train", help="train a classifier on a class-layout dataset")
    common(p)
    p.add_argument("dataset_dir")
    p.add_argument("model_out")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("classify", help="per-window predictions for one sequence")
    common(p)
    p.add_argument("sequence")
    p.add_argument("model")
    p.add_argument("--raw", metavar="WxH[:rgb]",
                   help="treat the sequence path as a raw 8-bit stream")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("evaluate", help="confusion matrix over a test dataset")
    common(p)
    p.add_argument("test_dir")
    p.add_argument("model")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("synth", help="generate the synthetic 4-class corpus")
    common(p)
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--train-per-class", type=int, default=synth.TRAIN_PER_CLASS)
    p.add_argument("--test-per-class", type=int, default=synth.TEST_PER_CLASS)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("sweep", help="accuracy table over feature sizes")
    common(p)
    p.add_argument("dataset_dir")
    p.add_argument("test_dir")
    p.add_argument("--values", type=int, nargs="+", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("dump", help="diagnostic exports for one sequence")
    common(p)
    p.add_argument("sequence")
    p.add_argument("--raw", metavar="WxH[:rgb]")
    p.add_argument("--dump-masks", metavar="DIR")
    p.add_argument("--dump-features", metavar="DIR")
    p.add_argument("--dump-flow", metavar="DIR")
    p.set_defaults(fn=cmd_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
