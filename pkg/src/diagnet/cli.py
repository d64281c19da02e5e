"""Command-line front end.

Every command writes its outputs into ``--out`` together with a
``manifest.json`` recording the resolved arguments, seeds, input hashes,
package version and kernel backend. ``diagnet replay MANIFEST --out DIR``
reruns a command from its manifest alone. Failures print one JSON line on
stderr and exit non-zero.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from diagnet import __version__, _core, augment, datakit, model, pipeline, signedgraph, trainer
from diagnet.augment import AugmentConfig, ExpandedClass, ExpandedDataset
from diagnet.dfo import DfoConfig
from diagnet.model import MlpSpec
from diagnet.objective import LossConfig
from diagnet.signedgraph import GraphConfig
from diagnet.trainer import TrainConfig

MANIFEST = "manifest.json"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_any(path, label_column) -> ExpandedDataset:
    """Plain or provenance-tagged CSV, as an expanded dataset."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    if "provenance" in header:
        return augment.read_expanded_csv(path, label_column)
    return ExpandedDataset.from_dataset(datakit.load_csv(path, label_column))


def _config(args) -> dict:
    skip = {"func", "out", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finish(args, out: Path, inputs: list, outputs: list, seeds: dict, started: float, extra=None):
    manifest = {
        "command": args.command,
        "config": _config(args),
        "seeds": seeds,
        "inputs": {str(Path(p).resolve()): sha256(p) for p in inputs},
        "outputs": {name: sha256(out / name) for name in outputs},
        "version": __version__,
        "backend": _core.BACKEND,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    if extra:
        manifest.update(extra)
    _write_json(manifest, out / MANIFEST)
    return manifest


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands

def cmd_gen_data(args):
    started = time.perf_counter()
    if args.kind != "two-annuli":
        raise CliError(f"unknown dataset kind {args.kind!r}")
    ds = datakit.generate_two_annuli(args.n, args.inner, args.outer, args.thickness, args.noise, args.seed)
    ds = datakit.LabeledDataset(ds.X, ds.y, ds.class_count, ("x0", "x1"))
    out = _out_dir(args)
    datakit.write_csv(ds, out / "data.csv", args.label_column)
    _finish(args, out, [], ["data.csv"], {"data": args.seed}, started)
    print(f"wrote {ds.n} rows to {out / 'data.csv'}")


def _aug_config(args) -> AugmentConfig:
    return AugmentConfig(gamma=args.gamma, r1=args.r1, r2=args.r2, r3=args.r3, budget_T=args.budget,
                         positive_fraction=args.pos_frac, negative_fraction=args.neg_frac,
                         seed_noise_sd=args.seed_noise, rng_seed=args.seed, distance=args.distance,
                         search_region=args.search_region, search_halfwidth=args.search_halfwidth)


def cmd_augment(args):
    started = time.perf_counter()
    train = datakit.load_csv(args.data, args.label_column)
    cfg = _aug_config(args)
    dfo_cfg = DfoConfig(budget=args.budget, rng_seed=args.seed)
    expanded, amap = pipeline.expand(train, cfg, dfo_cfg, normalize=not args.no_normalize)
    # generated points back to raw units; originals are copied untouched
    part = train.partition()
    classes = []
    for c, ec in enumerate(expanded.classes):
        back = amap.inverse if amap is not None else (lambda Z: Z)
        classes.append(ExpandedClass(c, part.X_c(c), [back(p[None, :])[0] for p in ec.positives],
                                     [back(q[None, :])[0] for q in ec.negatives], radii=ec.radii))
    raw = ExpandedDataset(classes, expanded.class_count, train.feature_names)
    out = _out_dir(args)
    augment.write_expanded_csv(raw, out / "expanded.csv", args.label_column)
    counts = {str(ec.label): {"original": len(ec.originals), "positive": len(ec.positives),
                              "negative": len(ec.negatives)} for ec in raw.classes}
    radii = {str(ec.label): list(ec.radii) for ec in expanded.classes}
    _finish(args, out, [args.data], ["expanded.csv"], {"augment": args.seed}, started,
            {"counts": counts, "resolved_radii": radii})
    print(f"wrote {raw.N} rows to {out / 'expanded.csv'}")


def _spec(args, dim: int, class_count: int) -> MlpSpec:
    return MlpSpec(dim, tuple(args.hidden), class_count, args.dropout, args.weight_decay,
                   args.embedding_activation)


def _train_config(args, seed: int) -> TrainConfig:
    return TrainConfig(epochs=args.epochs, batch_nodes=args.batch_nodes, batch_edges=args.batch_edges,
                       full_batch=args.full_batch, learning_rate=args.lr, optimizer=args.optimizer,
                       rng_seed=seed, eval_every=args.eval_every)


def _prepare(args):
    expanded = _load_any(args.data, args.label_column)
    expanded, amap = pipeline.normalize_expanded(expanded, not args.no_normalize)
    test = None
    if args.test:
        test = datakit.load_csv(args.test, args.label_column)
        if test.dim != expanded.dim:
            raise CliError(f"test data has {test.dim} features, training data has {expanded.dim}")
        if amap is not None:
            test = test.with_features(amap.apply(test.X))
    return expanded, amap, test


def _fit_one(expanded, test, args, n_plus, n_minus, lam, seed):
    graph = None
    if n_plus or n_minus:
        graph = signedgraph.build(expanded, GraphConfig(n_plus, n_minus, args.graph_distance))
    loss_cfg = LossConfig(lam=lam, margin_m=args.margin, embedding_distance=args.embedding_distance)
    spec = _spec(args, expanded.dim, expanded.class_count)
    params, report = trainer.fit(expanded, graph, spec, loss_cfg, _train_config(args, seed), test=test)
    return params, report, graph, spec


def cmd_train(args):
    started = time.perf_counter()
    if args.n_plus == 0 and args.n_minus == 0 and args.lam > 0:
        raise CliError("n_plus = n_minus = 0 leaves the graph term empty; use --lambda 0 for a baseline")
    expanded, amap, test = _prepare(args)
    params, report, graph, spec = _fit_one(expanded, test, args, args.n_plus, args.n_minus, args.lam, args.seed)
    out = _out_dir(args)
    model.save_params(params, out / "params.bin")
    _write_json({"spec": {"input_dim": spec.input_dim, "hidden_dims": list(spec.hidden_dims),
                          "class_count": spec.class_count, "dropout_rate": spec.dropout_rate,
                          "weight_decay": spec.weight_decay,
                          "embedding_activation": spec.embedding_activation},
                 "normalizer": amap.to_dict() if amap is not None else None,
                 "feature_names": list(expanded.feature_names or ())}, out / "model.json")
    report.write_csv(out / "report.csv")
    summary = {"final": report.final(), "nodes": expanded.N,
               "edges": graph.edge_count if graph is not None else 0}
    if test is not None:
        summary["test_accuracy"], summary["test_auc"] = trainer.evaluate(params, test)
    _write_json(summary, out / "summary.json")
    outputs = ["params.bin", "model.json", "report.csv", "summary.json"]
    if graph is not None:
        signedgraph.write_edge_list(graph, out / "graph.edges", out / "graph.nodes.csv")
        outputs += ["graph.edges", "graph.nodes.csv"]
    inputs = [args.data] + ([args.test] if args.test else [])
    _finish(args, out, inputs, outputs, {"train": args.seed}, started,
            {"regularizer_enabled": bool(args.lam > 0 and graph is not None),
             "resolved": {"n_plus": args.n_plus, "n_minus": args.n_minus, "lambda": args.lam,
                          "margin_m": args.margin}})
    line = {"final_loss": report.losses[-1].j_total}
    if test is not None:
        line.update(accuracy=summary["test_accuracy"], auc=summary["test_auc"])
    print(json.dumps(line))


def _grid_cell(job):
    data, test_path, args, n_plus, n_minus, lam, seed = job
    args_ns = argparse.Namespace(**args)
    expanded, _, test = _prepare(args_ns)
    params, _, _, _ = _fit_one(expanded, test, args_ns, n_plus, n_minus, lam, seed)
    acc, auc = trainer.evaluate(params, test)
    return {"n_plus": n_plus, "n_minus": n_minus, "lambda": lam, "seed": seed, "accuracy": acc, "auc": auc}


def cmd_grid(args):
    started = time.perf_counter()
    if not args.test:
        raise CliError("grid needs --test data to score each configuration")
    plain = {k: v for k, v in vars(args).items() if k != "func"}
    jobs = [(args.data, args.test, plain, p, m, lam, s)
            for p in args.n_plus for m in args.n_minus for lam in args.lam for s in args.seeds]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_grid_cell, jobs))
    else:
        rows = [_grid_cell(j) for j in jobs]
    out = _out_dir(args)
    cols = ["n_plus", "n_minus", "lambda", "seed", "accuracy", "auc"]
    with open(out / "grid.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([repr(row[c]) if isinstance(row[c], float) else ("" if row[c] is None else row[c])
                        for c in cols])
    _finish(args, out, [args.data, args.test], ["grid.csv"], {"train": list(args.seeds)}, started)
    print(f"wrote {len(rows)} rows to {out / 'grid.csv'}")


def cmd_eval(args):
    started = time.perf_counter()
    model_dir = Path(args.model)
    params = model.load_params(model_dir / "params.bin")
    with open(model_dir / "model.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    ds = datakit.load_csv(args.data, args.label_column)
    expected = params.weights[0].shape[0]
    if ds.dim != expected:
        raise CliError(f"data has {ds.dim} features, model expects {expected}")
    if meta.get("normalizer"):
        ds = ds.with_features(datakit.AffineMap.from_dict(meta["normalizer"]).apply(ds.X))
    acc, auc = trainer.evaluate(params, ds)
    result = {"accuracy": acc, "auc": auc}
    out = _out_dir(args)
    _write_json(result, out / "eval.json")
    _finish(args, out, [model_dir / "params.bin", model_dir / "model.json", args.data], ["eval.json"],
            {}, started)
    print(json.dumps(result, sort_keys=True))


def cmd_replay(args):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    for path, digest in manifest.get("inputs", {}).items():
        if not os.path.exists(path):
            raise CliError(f"input {path} is missing")
        if sha256(path) != digest:
            raise CliError(f"input {path} changed since the recorded run")
    command = manifest["command"]
    ns = argparse.Namespace(**manifest["config"], command=command, out=args.out,
                            func=COMMANDS[command])
    ns.func(ns)
    out = Path(args.out)
    same = {name: sha256(out / name) == digest for name, digest in manifest["outputs"].items()}
    print(json.dumps({"replayed": command, "identical": same}, sort_keys=True))
    if args.check and not all(same.values()):
        raise CliError("replayed outputs differ: " + ",".join(k for k, v in same.items() if not v))


COMMANDS = {"gen-data": cmd_gen_data, "augment": cmd_augment, "train": cmd_train,
            "grid": cmd_grid, "eval": cmd_eval}


# ------------------------------------------------------------------ parser

def _add_training_flags(p):
    p.add_argument("--data", required=True, help="training CSV, plain or with a provenance column")
    p.add_argument("--test", help="held-out CSV scored after training")
    p.add_argument("--margin", type=float, default=1.0, help="hinge margin m for negative edges")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--optimizer", choices=["sgd", "momentum"], default="momentum")
    p.add_argument("--batch-nodes", type=int, default=64)
    p.add_argument("--batch-edges", type=int, default=64)
    p.add_argument("--full-batch", action="store_true")
    p.add_argument("--eval-every", type=int, default=10)
    p.add_argument("--hidden", type=_int_list, default=[64, 32], help="hidden widths, e.g. 64,32")
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--weight-decay", type=float, default=1e-4)
    p.add_argument("--embedding-activation", choices=["linear", "relu"], default="linear")
    p.add_argument("--graph-distance", choices=["angular_cosine", "euclidean"], default="angular_cosine")
    p.add_argument("--embedding-distance", choices=["angular_cosine", "euclidean"], default="angular_cosine")
    p.add_argument("--no-normalize", action="store_true", help="skip z-scoring of features")
    p.add_argument("--label-column", default="label")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diagnet", description="Adversarial neighbor augmentation and signed-graph training")
    parser.add_argument("--version", action="version", version=f"diagnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="write a synthetic dataset")
    p.add_argument("--kind", default="two-annuli", choices=["two-annuli"])
    p.add_argument("--n", type=int, required=True, help="samples per class")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sd per coordinate")
    p.add_argument("--inner", type=float, default=1.0)
    p.add_argument("--outer", type=float, default=1.3)
    p.add_argument("--thickness", type=float, default=0.2)
    p.add_argument("--label-column", default="label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("augment", help="add adversarial positive and negative neighbors")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1e-2)
    p.add_argument("--budget", type=int, default=200, help="objective evaluations per neighbor")
    p.add_argument("--pos-frac", type=float, default=0.2)
    p.add_argument("--neg-frac", type=float, default=0.2)
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--r3", type=float)
    p.add_argument("--seed-noise", type=float, default=0.05)
    p.add_argument("--distance", choices=["angular_cosine", "euclidean"], default="angular_cosine")
    p.add_argument("--search-region", choices=["seed", "class"], default="seed")
    p.add_argument("--search-halfwidth", type=float, default=0.1)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--label-column", default="label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="build the signed graph and train the classifier")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-plus", type=int, default=1)
    p.add_argument("--n-minus", type=int, default=4)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    _add_training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="sweep n_plus, n_minus and lambda over several seeds")
    p.add_argument("--n-plus", type=_int_list, default=[0, 1])
    p.add_argument("--n-minus", type=_int_list, default=[0, 4])
    p.add_argument("--lambda", dest="lam", type=_float_list, default=[0.0, 1.0])
    p.add_argument("--seeds", type=_int_list, required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_training_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("eval", help="score a trained model on a dataset")
    p.add_argument("--model", required=True, help="directory written by train")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true", help="fail unless outputs are byte-identical")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        for key in ("data", "test", "model", "manifest"):
            if getattr(args, key, None):
                setattr(args, key, str(Path(getattr(args, key)).resolve()))
        args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:
        msg = " ".join(str(exc).split())
        print(json.dumps({"error": type(exc).__name__, "message": msg}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
