"""Command-line entry point: ``arcgad {inject,train,infer,eval,smoothness}``.

Exit codes: 0 success, 1 invalid input (bad arguments, malformed data or
config), 2 file-system errors.
"""
import argparse
import csv
import logging
import sys

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import TrainConfig, load_config
from .data import load_dataset, save_dataset
from .errors import ArcError, DataIOError, ValidationError
from .inject import InjectionSpec, inject_combined
from .pipeline import infer, smoothness_report, sweep_context_sizes, train_generalist

log = logging.getLogger("arcgad")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; here 2 is reserved for I/O
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def _read_ids(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    ids = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.replace(",", " ").split():
            try:
                ids.append(int(tok))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: not a node id: {tok!r}") from None
    return ids


def cmd_inject(args):
    ds = load_dataset(args.input)
    spec = InjectionSpec(p=args.p, q=args.q, k=args.k, attr_count=args.attr_count, seed=args.seed)
    out = inject_combined(ds, spec)
    save_dataset(out, args.output)
    log.info("injected %d anomalies into %s", int(out.labels.sum()), ds.name)


def cmd_train(args):
    cfg = load_config(args.config) if args.config else TrainConfig()
    datasets = [load_dataset(p) for p in args.data.split(",") if p]
    ckpt = train_generalist(datasets, cfg)
    save_checkpoint(ckpt, args.out)
    hist = ckpt.log["loss_history"]
    log.info("trained %d epochs, final loss %s", cfg.epochs, f"{hist[-1]:.6f}" if hist else "n/a")


def cmd_infer(args):
    ds = load_dataset(args.data)
    ckpt = load_checkpoint(args.ckpt)
    res = infer(ds, ckpt, _read_ids(args.context_ids), with_attention=args.attention_out is not None)
    rows = [(int(i), format(float(s), ".17g")) for i, s in zip(res.query_ids, res.scores)]
    _write_csv(args.scores_out, ["node_id", "score"], rows)
    if args.attention_out:
        header = ["query_id"] + [str(int(c)) for c in res.context_ids]
        rows = [[int(q)] + [format(float(v), ".17g") for v in row] for q, row in zip(res.query_ids, res.attention)]
        _write_csv(args.attention_out, header, rows)


def cmd_eval(args):
    ds = load_dataset(args.data)
    ckpt = load_checkpoint(args.ckpt)
    rows = sweep_context_sizes(ds, ckpt, n_ks=args.nk, seeds=args.seeds)
    keys = ["n_k", "seeds", "auroc_mean", "auroc_std", "auprc_mean", "auprc_std"]
    _write_csv(args.out, keys, [[r[k] for k in keys] for r in rows])
    for r in rows:
        log.info("n_k=%d auroc %.4f +- %.4f", r["n_k"], r["auroc_mean"], r["auroc_std"])


def cmd_smoothness(args):
    ds = load_dataset(args.data)
    rows = smoothness_report(ds, groups=args.groups, n_k=args.nk, seeds=args.seeds)
    keys = ["group", "percentile", "n_features", "s_min", "s_max", "auroc"]
    _write_csv(args.out, keys, [[r[k] for k in keys] for r in rows])


def build_parser():
    p = _Parser(prog="arcgad", description="Generalist graph anomaly detection with in-context scoring.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("inject", help="plant structural and attribute anomalies")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--p", type=int, default=15, help="clique size")
    s.add_argument("--q", type=int, default=5, help="number of cliques")
    s.add_argument("--k", type=int, default=50, help="candidate pool size for attribute copies")
    s.add_argument("--attr-count", type=int, default=None, help="attribute anomalies (default p*q)")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_inject)

    s = sub.add_parser("train", help="train one detector on labeled datasets")
    s.add_argument("--data", required=True, help="comma-separated dataset directories")
    s.add_argument("--config", default=None, help="INI config file (defaults if omitted)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("infer", help="score non-context nodes of a dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--ckpt", required=True)
    s.add_argument("--context-ids", required=True, help="file of normal node ids")
    s.add_argument("--scores-out", required=True)
    s.add_argument("--attention-out", default=None)
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("eval", help="AUROC/AUPRC over resampled context sets")
    s.add_argument("--data", required=True)
    s.add_argument("--ckpt", required=True)
    s.add_argument("--nk", type=_int_list, default=[10], help="context size, or a comma list")
    s.add_argument("--seeds", type=int, default=5)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("smoothness", help="per-smoothness-group AUROC of raw features")
    s.add_argument("--data", required=True)
    s.add_argument("--groups", type=int, default=5)
    s.add_argument("--nk", type=int, default=10)
    s.add_argument("--seeds", type=int, default=5)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_smoothness)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        args.func(args)
    except DataIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
