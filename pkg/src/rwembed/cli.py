"""Command-line driver: ``rwembed {embed,eval,sweep,repro,gen}``.

Options can come from the command line, from a flat ``key = value``
config file (``--config``), or from the defaults below, in that order of
precedence. The resolved configuration is echoed into every output.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, tasks
from .graph import (
    GraphError,
    LabelSet,
    export_holdout,
    generate_directed_sbm,
    generate_hierarchical_sbm,
    generate_sbm,
    karate_club,
    karate_labels,
    load_edge_list,
    load_labels,
    plant_hubs,
    split_holdout,
    write_edge_list,
)
from .pipeline import embed, factorized_series
from .sample_embed import TrainerConfig

logger = logging.getLogger("rwembed")


class UsageError(Exception):
    pass


def _tau_range(text: str) -> list[int]:
    """``"5"``, ``"1..100"`` or ``"1,2,5"``."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad Markov-time range {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _ratios(text) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ratio list {text!r}") from None


@dataclass(frozen=True)
class Opt:
    name: str
    type: object
    default: object
    help: str
    choices: tuple | None = None
    flag: bool = False


PIPELINE_OPTS = [
    Opt("input", str, None, "edge list (src dst [weight] per line)"),
    Opt("directed", _bool, False, "treat the edge list as directed", flag=True),
    Opt("process", str, "auto", "random-walk process", ("auto", "standard", "pagerank")),
    Opt("damping", float, 0.85, "PageRank damping factor"),
    Opt("similarity", str, "autocov", "similarity function", ("autocov", "pmi")),
    Opt("tau", int, 3, "Markov time"),
    Opt("aggregation", str, "none", "aggregate Markov times 1..tau", ("none", "log-mean-exp", "mean")),
    Opt("algo", str, "factorize", "embedding algorithm", ("factorize", "sample")),
    Opt("dim", int, 128, "embedding dimension"),
    Opt("negatives", int, 5, "negative samples per positive pair"),
    Opt("epochs", int, 400, "training epochs"),
    Opt("batch_size", int, 1000, "walks per training batch"),
    Opt("lr", float, 0.01, "Adam base learning rate"),
    Opt("lr_schedule", str, "linear", "learning-rate schedule", ("linear", "constant")),
    Opt("walks_per_node", int, 10, "walks started at every node"),
    Opt("walk_length", int, 80, "recorded steps per walk"),
    Opt("seed", int, 0, "random seed"),
    Opt("outdir", str, "rwembed_out", "output directory"),
]

EVAL_OPTS = [
    Opt("task", str, "linkpred", "evaluation task", ("linkpred", "classify", "community", "tausweep", "degnorm", "directed")),
    Opt("labels", str, None, "node label file (node label1[,label2,...])"),
    Opt("ratio", float, 0.2, "fraction of edges held out for link prediction"),
    Opt("ranking", str, "dot", "link ranking", ("dot", "lr")),
    Opt("k_ratios", _ratios, list(tasks.DEFAULT_K_RATIOS), "comma-separated k / |removed| ratios"),
    Opt("train_ratio", float, 0.5, "training fraction for node classification"),
    Opt("repeats", int, 10, "classification repeats"),
    Opt("tau_range", _tau_range, list(range(1, 101)), "Markov times for sweeps: a..b or a,b,c"),
    Opt("sweep_task", str, "linkpred", "task evaluated at every Markov time", ("linkpred", "classify", "community")),
    Opt("export_split", _bool, False, "also write the hold-out split", flag=True),
]

GEN_OPTS = [
    Opt("model", str, "sbm", "generator", ("sbm", "hubs", "hsbm", "dsbm", "karate")),
    Opt("sizes", str, "50,50", "block sizes"),
    Opt("p_intra", float, 0.15, "intra-block edge probability"),
    Opt("p_inter", float, 0.02, "inter-block edge probability"),
    Opt("hub_size", int, 20, "nodes contracted into each hub (hubs model)"),
    Opt("groups", int, 2, "top-level groups (hsbm)"),
    Opt("blocks_per_group", int, 2, "blocks per group (hsbm)"),
    Opt("block_size", int, 16, "nodes per block (hsbm)"),
    Opt("p_block", float, 0.95, "same-block probability (hsbm)"),
    Opt("p_group", float, 0.3, "same-group probability (hsbm)"),
    Opt("p_out", float, 0.01, "cross-group probability (hsbm)"),
    Opt("seed", int, 0, "random seed"),
    Opt("output", str, "graph.edges", "edge list to write; labels go next to it"),
]

COMMAND_OPTS = {
    "embed": PIPELINE_OPTS,
    "eval": PIPELINE_OPTS + EVAL_OPTS,
    "sweep": PIPELINE_OPTS + EVAL_OPTS,
    "gen": GEN_OPTS,
    "repro": [Opt("outdir", str, None, "directory for the result JSON")],
}


def _add_opts(p: argparse.ArgumentParser, opts) -> None:
    for o in opts:
        flag = "--" + o.name.replace("_", "-")
        kw = {"dest": o.name, "default": argparse.SUPPRESS, "help": f"{o.help} (default: {o.default})"}
        if o.flag:
            p.add_argument(flag, nargs="?", const=True, type=_bool, **kw)
        else:
            p.add_argument(flag, type=o.type, choices=o.choices, **kw)
    if opts is PIPELINE_OPTS or any(o.name == "algo" for o in opts):
        p.add_argument("--binary", dest="binary", nargs="?", const=True, type=_bool, default=argparse.SUPPRESS, help="binary embedding files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwembed", description="Random-walk graph embeddings and their evaluation.")
    parser.add_argument("--version", action="version", version=f"rwembed {__version__}")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (1 guarantees bitwise determinism)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "embed": "embed a graph and write U (and V) plus a manifest",
        "eval": "embed and evaluate on a downstream task",
        "sweep": "evaluate a task over a range of Markov times",
        "repro": "run a canned synthetic experiment and check its property",
        "gen": "write a synthetic graph",
    }
    for name, opts in COMMAND_OPTS.items():
        sp = sub.add_parser(name, help=helps[name])
        if name == "repro":
            sp.add_argument("name", nargs="?", help="experiment name (omit to list)")
        _add_opts(sp, opts)
    return parser


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve(command: str, args: argparse.Namespace, config_file: dict | None = None) -> dict:
    """Merge defaults, config-file values and command-line values."""
    opts = {o.name: o for o in COMMAND_OPTS[command]}
    cfg = {name: o.default for name, o in opts.items()}
    cfg["binary"] = False
    for k, v in (config_file or {}).items():
        if k == "binary":
            cfg[k] = _bool(v)
            continue
        if k not in opts:
            raise UsageError(f"unknown config key {k!r} for {command}")
        o = opts[k]
        try:
            val = o.type(v)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"config key {k}: {exc}") from None
        if o.choices and val not in o.choices:
            raise UsageError(f"config key {k}: {val!r} not in {o.choices}")
        cfg[k] = val
    for k, v in vars(args).items():
        if k in cfg:
            cfg[k] = v
    return cfg


def validate(command: str, cfg: dict) -> None:
    if command in ("embed", "eval", "sweep"):
        if cfg["input"] is None:
            raise UsageError("--input is required")
        if cfg["dim"] < 1:
            raise UsageError("--dim must be positive")
        if cfg["tau"] < 0:
            raise UsageError("--tau must be non-negative")
        if cfg["similarity"] == "pmi" and cfg["tau"] < 1:
            raise UsageError("PMI needs --tau >= 1")
        if cfg["aggregation"] != "none" and cfg["tau"] < 1:
            raise UsageError("aggregation needs --tau >= 1")
        if cfg["algo"] == "sample":
            if cfg["tau"] < 1:
                raise UsageError("sampling needs --tau >= 1")
            if cfg["aggregation"] != "none":
                raise UsageError("aggregation is only available with --algo factorize")
            if cfg["walk_length"] <= cfg["tau"]:
                raise UsageError("--walk-length must exceed --tau")
            for k in ("negatives", "epochs", "batch_size", "walks_per_node"):
                if cfg[k] < 1:
                    raise UsageError(f"--{k.replace('_', '-')} must be positive")
            if cfg["lr"] <= 0:
                raise UsageError("--lr must be positive")
        if not 0 < cfg["damping"] < 1:
            raise UsageError("--damping must lie in (0, 1)")
        if cfg["input"] != "karate" and not os.path.exists(cfg["input"]):
            raise UsageError(f"input file not found: {cfg['input']}")
    if command in ("eval", "sweep"):
        task = "tausweep" if command == "sweep" else cfg["task"]
        needs_labels = task in ("classify", "community") or (task == "tausweep" and cfg["sweep_task"] != "linkpred")
        if needs_labels and cfg["labels"] is None and cfg["input"] != "karate":
            raise UsageError(f"task {task} requires a label file (--labels)")
        if cfg["labels"] is not None and not os.path.exists(cfg["labels"]):
            raise UsageError(f"label file not found: {cfg['labels']}")
        if not 0 < cfg["ratio"] < 1:
            raise UsageError("--ratio must lie in (0, 1)")
        if any(not 0 < r <= 1 for r in cfg["k_ratios"]):
            raise UsageError("--k-ratios must lie in (0, 1]")
        if not cfg["tau_range"] or min(cfg["tau_range"]) < (1 if cfg["similarity"] == "pmi" else 0):
            raise UsageError("--tau-range must be nonempty and valid for the similarity")
        if task == "directed" and not cfg["directed"]:
            raise UsageError("task directed needs --directed input")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _load_graph(cfg):
    if cfg["input"] == "karate":
        return karate_club()
    return load_edge_list(cfg["input"], directed=cfg["directed"])


def _load_labels(cfg, g):
    if cfg.get("labels"):
        return load_labels(cfg["labels"], g)
    if cfg["input"] == "karate":
        return karate_labels(g)
    return None


def _trainer(cfg) -> TrainerConfig:
    return TrainerConfig(
        dim=cfg["dim"],
        negatives=cfg["negatives"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        lr=cfg["lr"],
        lr_schedule=cfg["lr_schedule"],
        seed=cfg["seed"],
    )


def _embed(g, cfg, tau=None):
    return embed(
        g,
        cfg["similarity"],
        cfg["tau"] if tau is None else tau,
        cfg["algo"],
        cfg["dim"],
        aggregation=cfg["aggregation"],
        process=cfg["process"],
        damping=cfg["damping"],
        trainer=_trainer(cfg) if cfg["algo"] == "sample" else None,
        walks_per_node=cfg["walks_per_node"],
        walk_length=cfg["walk_length"],
        seed=cfg["seed"],
    )


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tasks._jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _echo(cfg: dict, keep_outdir: bool = False) -> dict:
    # the output location is left out of reports so reruns elsewhere match byte for byte
    return {k: v for k, v in sorted(cfg.items()) if keep_outdir or k != "outdir"}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_embed(cfg: dict) -> int:
    t0 = time.perf_counter()
    g = _load_graph(cfg)
    t1 = time.perf_counter()
    e = _embed(g, cfg)
    t2 = time.perf_counter()
    out = cfg["outdir"]
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "embedding.txt" if not cfg["binary"] else "embedding.bin")
    e.save(path, id_map=g.id_map, binary=cfg["binary"])
    files = [os.path.basename(path)]
    if e.V is not None:
        files.append(os.path.basename(path) + ".target")
    losses = e.provenance.get("losses")
    if losses is not None:
        with open(os.path.join(out, "loss.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "mean_loss"])
            for i, v in enumerate(losses):
                w.writerow([i, repr(float(v))])
        files.append("loss.csv")
    manifest = {
        "command": "embed",
        "config": _echo(cfg, keep_outdir=True),
        "n": e.n,
        "d": e.d,
        "files": files,
        "warnings": list(e.warnings),
        "timings_seconds": {"load": t1 - t0, "embed": t2 - t1},
    }
    _write_json(os.path.join(out, "manifest.json"), manifest)
    print(f"wrote {', '.join(files)} to {out}")
    return 0


def _eval_once(task, g, labels, cfg, tau=None):
    echo = {"pipeline": _echo(cfg)}
    if tau is not None:
        echo["pipeline"]["tau"] = tau
    if task == "linkpred":
        split = split_holdout(g, cfg["ratio"], cfg["seed"])
        e = _embed(split.residual, cfg, tau)
        if cfg["ranking"] == "dot":
            return tasks.link_predict_dot(e, split, cfg["k_ratios"], config=echo), split
        return tasks.link_predict_lr(e, split, cfg["k_ratios"], seed=cfg["seed"], config=echo), split
    if task == "directed":
        split = split_holdout(g, cfg["ratio"], cfg["seed"])
        rep = tasks.directed_eval(
            split,
            labels,
            cfg["similarity"],
            cfg["tau"] if tau is None else tau,
            cfg["dim"],
            cfg["damping"],
            cfg["k_ratios"],
            cfg["train_ratio"],
            cfg["repeats"],
            cfg["seed"],
        )
        rep.config.update(echo)
        return rep, split
    e = _embed(g, cfg, tau)
    if task == "classify":
        return tasks.node_classify(e, labels, cfg["train_ratio"], cfg["repeats"], cfg["seed"], config=echo), None
    if task == "community":
        return tasks.community_detect(e, labels, cfg["seed"], config=echo), None
    if task == "degnorm":
        rep = tasks.degree_norm_correlation(e, g)
        rep.config.update(echo)
        return rep, None
    raise UsageError(f"unknown task {task!r}")


def _write_report(rep, out, stem) -> list[str]:
    rep.to_json(os.path.join(out, f"{stem}.json"))
    files = [f"{stem}.json"]
    if rep.curve is not None:
        rep.write_csv(os.path.join(out, f"{stem}.csv"))
        files.append(f"{stem}.csv")
    return files


def cmd_eval(cfg: dict) -> int:
    if cfg["task"] == "tausweep":
        return cmd_sweep(cfg)
    g = _load_graph(cfg)
    labels = _load_labels(cfg, g)
    out = cfg["outdir"]
    os.makedirs(out, exist_ok=True)
    rep, split = _eval_once(cfg["task"], g, labels, cfg)
    files = _write_report(rep, out, "report")
    if split is not None and cfg["export_split"]:
        export_holdout(split, os.path.join(out, "holdout"))
        files.append("holdout/")
    _write_json(os.path.join(out, "manifest.json"), {"command": "eval", "config": _echo(cfg, keep_outdir=True), "files": files})
    for k in sorted(rep.metrics):
        print(f"{k}\t{rep.metrics[k]:.6f}")
    return 0


def _sweep_reports(task, g, labels, cfg, taus, threads):
    """Per-tau reports; factorization sweeps reuse the matrix powers."""
    echo = {"pipeline": _echo(cfg)}
    if cfg["algo"] == "factorize" and cfg["aggregation"] == "none":
        if task == "linkpred":
            split = split_holdout(g, cfg["ratio"], cfg["seed"])
            series = factorized_series(split.residual, cfg["similarity"], taus, cfg["dim"], cfg["process"], cfg["damping"])
            reps = []
            for _, e in series:
                if cfg["ranking"] == "dot":
                    reps.append(tasks.link_predict_dot(e, split, cfg["k_ratios"], config=echo))
                else:
                    reps.append(tasks.link_predict_lr(e, split, cfg["k_ratios"], seed=cfg["seed"], config=echo))
            return reps
        series = factorized_series(g, cfg["similarity"], taus, cfg["dim"], cfg["process"], cfg["damping"])
        reps = []
        for _, e in series:
            if task == "classify":
                reps.append(tasks.node_classify(e, labels, cfg["train_ratio"], cfg["repeats"], cfg["seed"], config=echo))
            else:
                reps.append(tasks.community_detect(e, labels, cfg["seed"], config=echo))
        return reps
    res = tasks.tau_sweep(lambda t: _eval_once(task, g, labels, cfg, t)[0], taus, workers=threads)
    return res.reports


def cmd_sweep(cfg: dict, threads: int = 1) -> int:
    g = _load_graph(cfg)
    labels = _load_labels(cfg, g)
    task = cfg["sweep_task"]
    taus = cfg["tau_range"]
    out = cfg["outdir"]
    os.makedirs(os.path.join(out, "taus"), exist_ok=True)
    reports = _sweep_reports(task, g, labels, cfg, taus, threads)
    width = len(str(max(taus)))
    for tau, rep in zip(taus, reports):
        rep.config["tau"] = tau
        _write_report(rep, os.path.join(out, "taus"), f"tau_{tau:0{width}d}")
    metrics = sorted(reports[0].metrics)
    best = {}
    for m in metrics:
        vals = [r.metrics[m] for r in reports]
        best[m] = taus[int(np.argmax(vals))]
    with open(os.path.join(out, "sweep.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau"] + metrics)
        for tau, rep in zip(taus, reports):
            w.writerow([tau] + [repr(float(rep.metrics[m])) for m in metrics])
    summary = {
        "command": "sweep",
        "task": task,
        "config": _echo(cfg),
        "taus": taus,
        "best_tau": best,
        "best_value": {m: reports[taus.index(t)].metrics[m] for m, t in best.items()},
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    headline = "precision@100%" if task == "linkpred" else ("micro_f1" if task == "classify" else "nmi")
    if headline in best:
        print(f"best tau for {headline}: {best[headline]} ({summary['best_value'][headline]:.6f})")
    return 0


def cmd_repro(name: str | None, outdir: str | None) -> int:
    from .experiments import EXPERIMENTS, run

    if name is None or name not in EXPERIMENTS:
        if name is not None:
            print(f"rwembed: unknown experiment {name!r}", file=sys.stderr)
        print("available experiments:", file=sys.stderr if name else sys.stdout)
        for k in EXPERIMENTS:
            doc = (EXPERIMENTS[k].__doc__ or "").strip().splitlines()[0]
            print(f"  {k:15s} {doc}", file=sys.stderr if name else sys.stdout)
        return 2 if name is not None else 0
    res = run(name)
    print(res.line())
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        _write_json(os.path.join(outdir, f"{name}.json"), {"name": name, "passed": res.passed, "metrics": res.metrics})
    return 0 if res.passed else 1


def cmd_gen(cfg: dict) -> int:
    model, seed = cfg["model"], cfg["seed"]
    try:
        sizes = [int(s) for s in cfg["sizes"].split(",")]
    except ValueError:
        raise UsageError(f"bad --sizes {cfg['sizes']!r}") from None
    groups = None
    if model == "sbm":
        g = generate_sbm(sizes, cfg["p_intra"], cfg["p_inter"], seed)
    elif model == "hubs":
        g, _ = plant_hubs(generate_sbm(sizes, cfg["p_intra"], cfg["p_inter"], seed), cfg["hub_size"], seed)
    elif model == "hsbm":
        g, groups = generate_hierarchical_sbm(
            cfg["groups"], cfg["blocks_per_group"], cfg["block_size"], cfg["p_block"], cfg["p_group"], cfg["p_out"], seed
        )
    elif model == "dsbm":
        g = generate_directed_sbm(sizes, cfg["p_intra"], cfg["p_inter"], seed)
    else:
        g = karate_club()
    path = cfg["output"]
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    write_edge_list(g, path)
    stem = os.path.splitext(path)[0]
    written = [path]
    labels = karate_labels(g) if model == "karate" else (LabelSet.from_array(g.blocks) if g.blocks is not None else None)
    if labels is not None:
        with open(stem + ".labels", "w", encoding="utf-8") as fh:
            for u in range(g.n):
                names = ",".join(labels.label_names[c] for c in sorted(labels.assignments[u]))
                fh.write(f"{g.node_label(u)} {names}\n")
        written.append(stem + ".labels")
    if groups is not None:
        with open(stem + ".groups", "w", encoding="utf-8") as fh:
            for u in range(g.n):
                fh.write(f"{g.node_label(u)} {int(groups[u])}\n")
        written.append(stem + ".groups")
    print(f"{g.n} nodes, {g.m} edges -> {', '.join(written)}")
    return 0


def _limit_threads(threads: int):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return None
    return threadpool_limits(limits=threads)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    command = args.command
    ns = argparse.Namespace(**{k: v for k, v in vars(args).items() if k not in ("config", "threads", "verbose", "command", "name")})
    try:
        if command == "repro":
            return cmd_repro(args.name, getattr(ns, "outdir", None))
        file_cfg = read_config(args.config) if args.config else None
        cfg = resolve(command, ns, file_cfg)
        if command == "sweep":
            cfg["task"] = "tausweep"
        validate(command, cfg)
    except (UsageError, OSError) as exc:
        parser.error(str(exc))
    _limit_threads(args.threads)
    try:
        if command == "embed":
            return cmd_embed(cfg)
        if command == "eval":
            if cfg["task"] == "tausweep":
                return cmd_sweep(cfg, args.threads)
            return cmd_eval(cfg)
        if command == "sweep":
            return cmd_sweep(cfg, args.threads)
        return cmd_gen(cfg)
    except (GraphError, tasks.EvaluationError, ValueError, RuntimeError) as exc:
        print(f"rwembed: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
