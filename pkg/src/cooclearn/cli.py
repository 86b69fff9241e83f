"""Command-line interface.

Verbs: ingest, train, evaluate, predict, export-embeddings, grad-check.
Every command is deterministic given ``--seed`` (timing columns aside).
Exit codes: 0 success, 1 usage error, 2 data error, 3 check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import estimators, evaluation, ingest, serialize, training
from .scoring import sigmoid
from .utils import substream

USAGE_ERROR = 1
DATA_ERROR = 2
CHECK_FAILURE = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def parse_layer_spec(spec: str) -> tuple[int, ...]:
    """Parse ``AxBxC`` into a width tuple; the empty string means no layers."""
    spec = spec.strip()
    if not spec:
        return ()
    try:
        sizes = tuple(int(part) for part in spec.split("x"))
    except ValueError:
        raise ValueError(f"bad layer spec {spec!r}; expected e.g. 32x16") from None
    if any(s < 1 for s in sizes):
        raise ValueError(f"layer sizes must be positive, got {spec!r}")
    return sizes


def parse_k_list(spec: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(part) for part in spec.split(","))
    except ValueError:
        raise ValueError(f"bad K list {spec!r}; expected e.g. 1,10") from None
    if any(k < 1 for k in ks):
        raise ValueError("K values must be positive")
    return ks


def _load_config(path: str) -> dict[str, str]:
    """key=value lines; blank lines and '#' comments skipped."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _estimator_from_args(args) -> object:
    common = dict(
        learning_rate=args.lr,
        lr_decay=args.lr_decay,
        n_negatives=args.negatives,
        n_epochs=args.epochs,
        weight_decay=args.weight_decay,
        reweight_negatives=args.reweight_negatives,
        random_state=args.seed,
        verbose=1 if args.verbose else 0,
    )
    if args.model == "l1":
        return estimators.ItemBiasModel(**common)
    if args.model == "fvbm":
        return estimators.FullyVisibleBoltzmann(init_scale=args.init_scale, **common)
    if args.model == "lbl":
        return estimators.LogBilinearModel(
            n_components=args.dim,
            init_scale=args.init_scale,
            use_bias=not args.no_bias,
            **common,
        )
    return estimators.DeepEmbeddingModel(
        layer_sizes=args.layers, init_scale=args.init_scale, **common
    )


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("dem", "fvbm", "l1", "lbl"), default="dem")
    p.add_argument(
        "--layers",
        type=parse_layer_spec,
        default=(32,),
        help="hidden widths, e.g. 32x16; '' for none",
    )
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--lr-decay", type=float, default=0.95)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--init-scale", type=float, default=1.0)
    p.add_argument("--weight-decay", type=float, default=1e-6)
    p.add_argument("--dim", type=int, default=64, help="embedding width (lbl)")
    p.add_argument("--no-bias", action="store_true", help="drop the lbl bias term")
    p.add_argument(
        "--reweight-negatives",
        action="store_true",
        help="unbias the subsampled negative terms",
    )


def cmd_ingest(args) -> int:
    readers = {
        "edges": lambda f: ingest.read_edge_list(f, edges=args.edges),
        "transactions": ingest.read_transactions,
        "movielens": lambda f: ingest.read_movielens(
            f, threshold=4.0 if args.threshold is None else args.threshold
        ),
        "jester": lambda f: ingest.read_jester(
            f, threshold=0.0 if args.threshold is None else args.threshold
        ),
    }
    with open(args.input, encoding="utf-8") as f:
        corpus = readers[args.format](f)
    if args.top_items:
        corpus = ingest.filter_top_items(corpus, args.top_items)
    serialize.save_corpus(corpus, args.output)
    print(
        f"ingested {len(corpus)} records over {corpus.n_items} items -> {args.output}"
    )
    return 0


def cmd_train(args) -> int:
    corpus = serialize.load_corpus(args.corpus)
    model = _estimator_from_args(args)
    model.verbose = 1
    model.fit(corpus)
    serialize.save_checkpoint(model.params_, args.output, kind=model._model_kind)
    trace_path = str(args.output) + ".trace.tsv"
    with open(trace_path, "w", encoding="utf-8") as f:
        f.write("epoch\tloss\tseconds\n")
        for i, (loss, secs) in enumerate(
            zip(model.trace_.epoch_losses, model.trace_.wall_times), start=1
        ):
            f.write(f"{i}\t{loss:.10f}\t{secs:.3f}\n")
    print(f"checkpoint -> {args.output}")
    return 0


def _baseline_from_name(name: str, args) -> estimators.CovisitRecommender:
    return estimators.CovisitRecommender(
        method=name,
        steps=args.lrw_steps,
        aggregate_steps=not args.lrw_final_only,
        norm=args.norm,
    )


def cmd_evaluate(args) -> int:
    corpus = serialize.load_corpus(args.corpus)
    k_list = list(args.k)

    if args.compare:
        scorers, labels = [], []
        for ckpt in args.compare:
            kind, params = serialize.load_checkpoint(ckpt)
            scorers.append(params)
            labels.append(f"{kind}:{Path(ckpt).name}")
        hit_maps = evaluation.paired_hits(corpus, scorers, k_list, seed=args.seed)
        for k in k_list:
            accs = [float(np.mean(h[k])) for h in hit_maps]
            p = evaluation.mcnemar_significance(hit_maps[0][k], hit_maps[1][k])
            print(
                f"top@{k}\t{labels[0]}={accs[0]:.6f}\t{labels[1]}={accs[1]:.6f}"
                f"\tmcnemar_p={p:.6g}"
            )
        return 0

    if args.baseline:
        model = _baseline_from_name(args.baseline, args)
        label = args.baseline
    else:
        model = _estimator_from_args(args)
        label = args.model
    report = evaluation.cross_validate(
        corpus,
        model,
        k_list=k_list,
        k_folds=args.folds,
        seed=args.seed,
        label=label,
        verbose=1 if args.verbose else 0,
    )
    print(evaluation.format_report([report]))
    if args.report:
        summary = {
            "model": report.label,
            "seed": args.seed,
            "folds": args.folds,
            "n_test": report.n_test,
            "seconds": report.wall_time,
            "top_k": {
                str(k): {"mean": m, "std": s, "per_fold": report.per_fold[k]}
                for k, (m, s) in report.per_k.items()
            },
        }
        Path(args.report).write_text(json.dumps(summary, indent=2) + "\n")
        print(f"summary -> {args.report}")
    return 0


def cmd_predict(args) -> int:
    kind, params = serialize.load_checkpoint(args.checkpoint)
    try:
        context = np.array(sorted({int(t) for t in args.items.split(",")}), dtype=np.int64)
    except ValueError:
        raise ValueError(f"bad item list {args.items!r}; expected e.g. 3,17,42") from None
    if context.size and (context.min() < 0 or context.max() >= params.n_items):
        raise ValueError(
            f"item ids must lie in [0, {params.n_items}) for this checkpoint"
        )
    ranked = evaluation.rank_candidates(params, context, args.k)
    print("item\tprobability")
    for item, score in zip(ranked.items, ranked.scores):
        print(f"{int(item)}\t{sigmoid(float(score)):.6f}")
    return 0


def cmd_export_embeddings(args) -> int:
    kind, params = serialize.load_checkpoint(args.checkpoint)
    tokens = None
    if args.vocab:
        tokens = serialize.load_vocabulary(args.vocab).id_to_token
    serialize.export_embeddings(params, args.output, tokens=tokens)
    dims = sum(r.shape[1] for r in params.readouts)
    print(f"exported {params.n_items} x {dims} embedding table -> {args.output}")
    return 0


def cmd_grad_check(args) -> int:
    params = training.init_dem_params(
        args.n_items, args.layers, init_scale=1.0, seed=args.seed
    )
    rng = substream(args.seed, "init", 1)
    size = int(rng.integers(2, max(3, args.n_items // 2)))
    record = np.sort(rng.choice(args.n_items, size=size, replace=False))
    err = training.gradient_check(
        params,
        record,
        n_negatives=args.negatives,
        epsilon=args.epsilon,
        seed=args.seed,
        corrupt_backprop=args.corrupt_backprop,
    )
    ok = err <= 1e-4
    print(f"max relative gradient error: {err:.3e}  [{'PASS' if ok else 'FAIL'}]")
    return 0 if ok else CHECK_FAILURE


def build_parser() -> _Parser:
    parser = _Parser(prog="cooclearn", description=__doc__)
    parser.add_argument(
        "--config",
        default=None,
        help="key=value defaults file; explicit flags win on conflict",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[], help="parse a dataset into a corpus file")
    p.add_argument("--format", required=True, choices=("edges", "transactions", "movielens", "jester"))
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=float, default=None, help="binarization threshold override")
    p.add_argument("--edges", choices=("out", "in", "both"), default="out")
    p.add_argument("--top-items", type=int, default=None, help="keep only the M most frequent items")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validated Top@K accuracy")
    p.add_argument("--corpus", required=True)
    p.add_argument("--baseline", choices=("cvg", "normcvg", "lrw"), default=None)
    p.add_argument("--compare", nargs=2, metavar="CKPT", default=None,
                   help="two checkpoints evaluated on identical masked records")
    p.add_argument("--k", type=parse_k_list, default=(1, 10))
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="write a JSON summary here")
    p.add_argument("--norm", choices=("cosine", "source", "target"), default="cosine")
    p.add_argument("--lrw-steps", type=int, default=3)
    p.add_argument("--lrw-final-only", action="store_true")
    p.add_argument("--verbose", action="store_true")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="rank missing items for a context")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--items", required=True, help="comma-separated context item ids")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("export-embeddings", help="dump per-item semantic vectors")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--vocab", default=None, help="vocabulary sidecar for token names")
    p.set_defaults(func=cmd_export_embeddings)

    p = sub.add_parser("grad-check", help="verify analytic gradients numerically")
    p.add_argument("--layers", type=parse_layer_spec, default=(8, 4))
    p.add_argument("--n-items", type=int, default=20)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt-backprop", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_grad_check)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        at = argv.index("--config")
        if at + 1 >= len(argv):
            parser.error("--config requires a path")
        try:
            overrides = _load_config(argv[at + 1])
        except (OSError, ValueError) as exc:
            print(f"cooclearn: {exc}", file=sys.stderr)
            return DATA_ERROR
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(
                **{k: _coerce_default(action, k, v) for k, v in overrides.items() if k in known}
            )
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (ingest.ParseError, serialize.FormatError) as exc:
        print(f"cooclearn: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (ValueError, OSError) as exc:
        print(f"cooclearn: {exc}", file=sys.stderr)
        return DATA_ERROR


def _coerce_default(subparser, key: str, value: str):
    for action in subparser._actions:
        if action.dest == key:
            if isinstance(action, argparse._StoreTrueAction):
                return value.lower() in ("1", "true", "yes", "on")
            if action.type is not None:
                return action.type(value)
            return value
    return value


if __name__ == "__main__":
    sys.exit(main())
