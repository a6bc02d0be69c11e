"""Command-line entry point.

Subcommands: audit, inject, gen-sbm, evaluate, conformal, export-clean,
serve. Exit codes form a stable scripting contract: 0 success, 1 usage
error, 2 data/parse error, 3 internal failure. Option values resolve as
CLI flag > config file > built-in default.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import experiment, noise, report as report_mod, service
from .audit import (DEFAULT_K, DEFAULT_POLICY, DEFAULT_SYNTH_RATIO,
                    derive_seed, run_audit)
from .classifier import load_softmax, train_base
from .conformal import fn_threshold, fp_threshold
from .errors import AuditError, DataError, GuaranteeError, ParseError
from .graph import load_graph
from .sbm import SbmConfig, gen_sbm


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exception, not exit code 2."""

    def error(self, message):
        raise UsageError(message)


# Config-file keys are typed per subcommand: one shared file can hold
# settings for several commands, and each command only reads the keys it
# understands (e.g. `eps` is a single float for inject but a grid list for
# evaluate). Unknown keys are rejected; inapplicable ones are ignored.
_SBM_TYPES = {
    "n": int,
    "classes": int,
    "p_in": float,
    "p_out": float,
    "dim": int,
    "signal": float,
    "fractions": str,
    "seed": int,
}

_SBM_DEFAULTS = {
    "n": 1000,
    "classes": 5,
    "p_in": 0.02,
    "p_out": 0.002,
    "dim": 0,
    "signal": 1.5,
    "fractions": "0.4,0.3,0.3",
    "seed": 0,
}

_AUDIT_TYPES = {"seed": int, "k": int, "k_base": int, "threshold": str,
                "synth_ratio": float}
_AUDIT_DEFAULTS = {"seed": 0, "k": DEFAULT_K, "k_base": 2,
                   "threshold": DEFAULT_POLICY,
                   "synth_ratio": DEFAULT_SYNTH_RATIO}

_INJECT_TYPES = {"seed": int, "eps": float, "ratio": float}
_INJECT_DEFAULTS = {"seed": 0, "ratio": 0.5}

_EVALUATE_TYPES = {**_SBM_TYPES, "eps": str, "noise": str, "seeds": str,
                   "k": int}
_EVALUATE_DEFAULTS = {**_SBM_DEFAULTS, "eps": "0.025,0.05,0.1",
                      "noise": "sym,asym", "seeds": "0,1,2,3,4",
                      "k": DEFAULT_K}

_CONFORMAL_TYPES = {"mode": str, "alpha": float, "p": float}
_CONFORMAL_DEFAULTS = {"mode": "fp"}

_SERVE_TYPES = {"port": int, "host": str}
_SERVE_DEFAULTS = {"port": 8000, "host": "127.0.0.1"}

CONFIG_KEYS = frozenset().union(
    _AUDIT_TYPES, _INJECT_TYPES, _EVALUATE_TYPES, _CONFORMAL_TYPES,
    _SERVE_TYPES, _SBM_TYPES)


def read_config(path) -> dict:
    """Parse the key=value config format ('#' comments, blank lines ok)."""
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise ParseError(path, lineno, f"expected key=value, got {stripped!r}")
            cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _apply_config(args: argparse.Namespace, cfg: dict) -> None:
    types = args.config_types
    for key, raw in cfg.items():
        if key not in CONFIG_KEYS:
            raise DataError(f"unknown config key {key!r}")
        if key in types and getattr(args, key, None) is None:
            try:
                setattr(args, key, types[key](raw))
            except ValueError:
                raise DataError(f"config key {key!r}: bad value {raw!r}")
    for key, value in args.config_defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _float_list(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DataError(f"malformed {what} list {text!r}")


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DataError(f"malformed {what} list {text!r}")


def _write_meta(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _load_scores_file(path) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                values.append(float(stripped))
            except ValueError:
                raise ParseError(path, lineno, f"not a number: {stripped!r}")
    return np.asarray(values)


def _add_graph_args(p: _Parser, features_required: bool = False) -> None:
    p.add_argument("--edges", required=True, help="edge list file")
    p.add_argument("--labels", required=True, help="label CSV (node_id,label)")
    p.add_argument("--splits", required=True, help="split CSV (node_id,split)")
    p.add_argument("--features", required=features_required,
                   help="feature CSV, one row per node")
    p.add_argument("--num-classes", type=int, default=None,
                   help="class count (default: max label + 1)")


def _load_graph_args(args):
    return load_graph(args.edges, args.labels, args.splits,
                      feature_path=args.features, num_classes=args.num_classes)


def build_parser() -> _Parser:
    parser = _Parser(prog="graphaudit",
                     description="Label-noise auditing for node-classification graphs")
    parser.add_argument("--config", help="key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", parents=[], help="score and flag suspect labels")
    _add_graph_args(p)
    p.add_argument("--softmax", help="CSV of per-node class probabilities")
    p.add_argument("--train-base", action="store_true",
                   help="train the built-in classifier instead of --softmax")
    p.add_argument("--k-base", type=int, default=None,
                   help="feature smoothing hops for the built-in classifier")
    p.add_argument("--k", type=int, default=None, help="agreement feature hops")
    p.add_argument("--threshold", default=None,
                   help="flag policy: fixed:<x> | bayes:<rate> | "
                        "conformal-fp:<alpha>,<p> | conformal-fn:<alpha>,<p>")
    p.add_argument("--synth-ratio", type=float, default=None,
                   help="fraction of validation nodes corrupted for training")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dataset", default=None, help="dataset id recorded in the report")
    p.add_argument("--out", required=True, help="audit report JSON path")
    p.add_argument("--transition-out", help="write the transition model JSON here")
    p.add_argument("--model-out", help="write the detector checkpoint here")
    p.set_defaults(func=cmd_audit, config_types=_AUDIT_TYPES,
                   config_defaults=_AUDIT_DEFAULTS)

    p = sub.add_parser("inject", help="corrupt labels synthetically")
    p.add_argument("--labels", required=True)
    p.add_argument("--num-classes", type=int, default=None)
    p.add_argument("--mode", choices=["symmetric", "asymmetric", "transition"],
                   required=True)
    p.add_argument("--eps", type=float, default=None,
                   help="flip fraction for symmetric/asymmetric")
    p.add_argument("--transition", help="transition JSON (for --mode transition)")
    p.add_argument("--ratio", type=float, default=None,
                   help="sampled fraction for --mode transition")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="corrupted-label CSV path")
    p.set_defaults(func=cmd_inject, config_types=_INJECT_TYPES,
                   config_defaults=_INJECT_DEFAULTS)

    p = sub.add_parser("gen-sbm", help="generate a planted-partition dataset")
    for name, typ in (("--n", int), ("--classes", int), ("--p-in", float),
                      ("--p-out", float), ("--dim", int), ("--signal", float)):
        p.add_argument(name, type=typ, default=None)
    p.add_argument("--fractions", default=None, help="train,val,test fractions")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen_sbm, config_types=_SBM_TYPES,
                   config_defaults=_SBM_DEFAULTS)

    p = sub.add_parser("evaluate", help="run the detection experiment grid")
    for name, typ in (("--n", int), ("--classes", int), ("--p-in", float),
                      ("--p-out", float), ("--dim", int), ("--signal", float)):
        p.add_argument(name, type=typ, default=None)
    p.add_argument("--fractions", default=None)
    p.add_argument("--eps", default=None, help="comma-separated flip fractions")
    p.add_argument("--noise", default=None, help="comma-separated kinds (sym,asym)")
    p.add_argument("--seeds", default=None, help="comma-separated seeds")
    p.add_argument("--seed", type=int, default=None,
                   help="generator seed component (per-run seeds come from --seeds)")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json", required=True)
    p.set_defaults(func=cmd_evaluate, config_types=_EVALUATE_TYPES,
                   config_defaults=_EVALUATE_DEFAULTS)

    p = sub.add_parser("conformal", help="compute a conformal score threshold")
    p.add_argument("--scores", help="text file, one score per line")
    p.add_argument("--report", help="audit report JSON to take scores from")
    p.add_argument("--mode", choices=["fp", "fn"], default=None)
    p.add_argument("--alpha", type=float, default=None, required=False)
    p.add_argument("--p", type=float, default=None,
                   help="expected mislabel fraction among the scores")
    p.add_argument("--out", help="write threshold JSON here (default: stdout)")
    p.set_defaults(func=cmd_conformal, config_types=_CONFORMAL_TYPES,
                   config_defaults=_CONFORMAL_DEFAULTS)

    p = sub.add_parser("export-clean", help="apply verdicts to labels/splits")
    _add_graph_args(p)
    p.add_argument("--report", help="audit report JSON (optional consistency check)")
    p.add_argument("--verdicts", required=True, help="JSON-lines verdict log")
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-splits", required=True)
    p.set_defaults(func=cmd_export_clean, config_types={}, config_defaults={})

    p = sub.add_parser("serve", help="serve the review API over a report")
    _add_graph_args(p)
    p.add_argument("--report", required=True)
    p.add_argument("--softmax", help="per-node probabilities for context views")
    p.add_argument("--verdicts", required=True, help="JSON-lines verdict log path")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--ui", help="directory of static UI files to serve at /")
    p.set_defaults(func=cmd_serve, config_types=_SERVE_TYPES,
                   config_defaults=_SERVE_DEFAULTS)

    return parser


def cmd_audit(args) -> int:
    if not args.softmax and not args.train_base:
        raise UsageError("need --softmax FILE or --train-base")
    if args.softmax and args.train_base:
        raise UsageError("--softmax and --train-base are mutually exclusive")
    g = _load_graph_args(args)
    if args.softmax:
        probs = load_softmax(args.softmax, g.n, g.c)
    else:
        _, probs = train_base(g, k_base=args.k_base,
                              seed=derive_seed(args.seed, 0))
    result = run_audit(g, probs, k_hops=args.k, policy=args.threshold,
                       seed=args.seed, synth_ratio=args.synth_ratio)
    dataset = args.dataset or Path(args.labels).stem
    rep = report_mod.build_report(dataset, g, result)
    report_mod.write_report(rep, args.out)
    if args.transition_out:
        _write_meta(args.transition_out, rep["transition"])
    if args.model_out:
        result.model.save(args.model_out)
    est = result.transition
    print(f"audited {g.n} nodes: {int(result.flags.sum())} flagged at "
          f"threshold {result.threshold:.6g} ({result.policy}); "
          f"transition uncounted {est.uncounted}/{g.val_nodes.size} "
          f"validation nodes")
    return 0


def cmd_inject(args) -> int:
    g = load_graph_labels_only(args.labels, args.num_classes)
    node_set = np.flatnonzero(g["labels"] >= 0)
    labels = g["labels"]
    c = g["c"]
    if args.mode == "transition":
        if not args.transition:
            raise UsageError("--mode transition needs --transition FILE")
        with open(args.transition, "r", encoding="utf-8") as fh:
            conditional = np.asarray(json.load(fh)["conditional"])
        picked = noise.sample_synthetic_set(node_set, args.ratio,
                                            derive_seed(args.seed, 1))
        corrupted = noise.flip_by_transition(labels, picked, conditional,
                                             derive_seed(args.seed, 2))
    else:
        if args.eps is None:
            raise UsageError(f"--mode {args.mode} needs --eps")
        inject = (noise.inject_symmetric if args.mode == "symmetric"
                  else noise.inject_asymmetric)
        corrupted = inject(labels, node_set, args.eps,
                           derive_seed(args.seed, 1), c)
    corrupted.to_csv(args.out)
    _write_meta(str(args.out) + ".meta.json",
                {"command": "inject", "mode": args.mode, "eps": args.eps,
                 "ratio": args.ratio, "seed": args.seed,
                 "flipped": int(corrupted.flipped.sum())})
    print(f"flipped {int(corrupted.flipped.sum())} of {node_set.size} nodes "
          f"({args.mode}, seed {args.seed})")
    return 0


def load_graph_labels_only(label_path, num_classes) -> dict:
    """Labels without graph structure, for structure-free commands."""
    from .graph import _parse_id_csv, _parse_label_field

    rows = _parse_id_csv(label_path, "label")
    if not rows:
        raise ParseError(label_path, 1, "no label rows")
    n = len(rows)
    labels = np.full(n, -2, dtype=np.int64)
    for lineno, node_id, text in rows:
        if node_id >= n:
            raise ParseError(label_path, lineno, f"node_id {node_id} >= node count {n}")
        if labels[node_id] != -2:
            raise ParseError(label_path, lineno, f"duplicate node_id {node_id}")
        labels[node_id] = _parse_label_field(text, label_path, lineno, num_classes)
    c = num_classes if num_classes is not None else int(labels.max()) + 1
    return {"labels": labels, "c": c}


def _sbm_config(args) -> SbmConfig:
    fractions = tuple(_float_list(args.fractions, "fractions"))
    return SbmConfig(n=args.n, c=args.classes, p_in=args.p_in, p_out=args.p_out,
                     d=args.dim, signal=args.signal, fractions=fractions,
                     seed=args.seed)


def cmd_gen_sbm(args) -> int:
    cfg = _sbm_config(args)
    g = gen_sbm(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.txt", "w", encoding="utf-8") as fh:
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
    (out / "labels.csv").write_text(report_mod.labels_csv(g.labels), encoding="utf-8")
    (out / "splits.csv").write_text(report_mod.splits_csv(g.splits), encoding="utf-8")
    np.savetxt(out / "features.csv", g.features, delimiter=",", fmt="%.17g")
    _write_meta(out / "meta.json",
                {"command": "gen-sbm", **dataclasses.asdict(cfg)})
    print(f"wrote {g.n} nodes / {g.num_edges} edges to {out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _sbm_config(args)
    eps_list = _float_list(args.eps, "eps")
    kinds = [k.strip() for k in args.noise.split(",") if k.strip()]
    seeds = _int_list(args.seeds, "seeds")
    reports = []
    for kind in kinds:
        for eps in eps_list:
            reports.extend(experiment.run_experiment(cfg, eps, kind, args.k, seeds))
    Path(args.out_csv).write_text(experiment.reports_to_csv(reports), encoding="utf-8")
    Path(args.out_json).write_text(experiment.summary_json(reports), encoding="utf-8")
    print(f"ran {len(reports) // 2} settings x seeds; "
          f"wrote {args.out_csv} and {args.out_json}")
    return 0


def cmd_conformal(args) -> int:
    if args.alpha is None or args.p is None:
        raise UsageError("conformal needs --alpha and --p")
    if bool(args.scores) == bool(args.report):
        raise UsageError("need exactly one of --scores or --report")
    if args.scores:
        scores = _load_scores_file(args.scores)
    else:
        rep = report_mod.load_report(args.report)
        scores = np.asarray([r["mislabel_score"] for r in rep["records"]])
    fn = fp_threshold if args.mode == "fp" else fn_threshold
    ct = fn(scores, args.p, args.alpha)
    text = json.dumps(ct.to_json(), indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_export_clean(args) -> int:
    g = _load_graph_args(args)
    verdicts = report_mod.load_verdicts(args.verdicts, num_classes=g.c,
                                        num_nodes=g.n)
    effective = report_mod.effective_verdicts(verdicts)
    if args.report:
        rep = report_mod.load_report(args.report)
        known = {r["node_id"] for r in rep["records"]}
        stray = sorted(set(effective) - known)
        if stray:
            raise DataError(f"verdicts for nodes without audit records: {stray}")
    label_csv, split_csv = report_mod.export_clean(g, effective)
    Path(args.out_labels).write_text(label_csv, encoding="utf-8")
    Path(args.out_splits).write_text(split_csv, encoding="utf-8")
    print(f"applied {len(effective)} verdicts; wrote {args.out_labels} "
          f"and {args.out_splits}")
    return 0


def cmd_serve(args) -> int:
    g = _load_graph_args(args)
    rep = report_mod.load_report(args.report)
    probs = load_softmax(args.softmax, g.n, g.c) if args.softmax else None
    service.serve(rep, g, args.verdicts, port=args.port, host=args.host,
                  probs=probs, ui_dir=args.ui)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = read_config(args.config) if args.config else {}
        _apply_config(args, cfg)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, DataError, GuaranteeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
