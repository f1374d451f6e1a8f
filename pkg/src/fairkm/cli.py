"""``fairkm`` command line: gen-data, run, pareto, sa2gd, verify.

Exit codes: 0 ok, 1 usage/config, 2 data, 3 runtime.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import (Dataset, SyntheticSpec, generate_gaussian_mixture, load_csv,
                       load_presets, preset_spec, write_csv)
from .errors import ConfigError, DataError, FairKMError
from .fair_swap import SwapPolicy
from .kmeans_core import init_state
from .metrics import balance_of_labels, cost_of_labels
from .pareto import AlternationConfig, child_seed, pareto_front_run, safairkm_run
from .sa2gd import PRESET_X0, preset_problem, rate_experiment, sa2gd_run, target_weight

log = logging.getLogger("fairkm")

FRONT_HEADER = ["cost", "balance", "n_a", "n_b", "seed", "iteration", "label_file"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _threads_default() -> int:
    env = os.environ.get("FAIRKM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FAIRKM_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        try:
            a, b = tok.split(":")
            out.append((int(a), int(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad pair {tok!r}; expected n_a:n_b") from None
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $FAIRKM_THREADS or CPU count)")
    common.add_argument("-o", "--out", type=Path, default=None, help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("dataset", type=Path, help="dataset CSV (header row, one group column)")
    data.add_argument("--group-column", default="group")
    data.add_argument("--features", default=None, help="comma-separated feature columns")
    data.add_argument("--zscore", action="store_true", help="standardize feature columns")
    data.add_argument("--subsample", type=int, default=None, help="random subsample size")
    data.add_argument("-K", "--clusters", type=int, default=2)
    data.add_argument("--target", choices=["local", "global"], default="local")
    data.add_argument("--candidate-batch", type=int, default=4)
    data.add_argument("--batch-growth", type=int, default=1)
    data.add_argument("--growth-every", type=int, default=50)
    data.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")

    p = _Parser(prog="fairkm", description="Bi-objective fair k-means toolkit")
    p.add_argument("--version", action="version", version=f"fairkm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", parents=[common], help="write a synthetic dataset CSV")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help=f"one of: {', '.join(sorted(load_presets()))}")
    src.add_argument("--spec", type=Path, help="JSON mixture spec file")

    r = sub.add_parser("run", parents=[common, data], help="single SAfairKM run with a trace")
    r.add_argument("--na", type=int, default=4)
    r.add_argument("--nb", type=int, default=0)
    r.add_argument("--iters", type=int, default=400)

    f = sub.add_parser("pareto", parents=[common, data], help="Pareto-front sweep")
    f.add_argument("--pairs", type=_pairs, default=[(4, 0), (3, 1), (1, 3), (0, 4)])
    f.add_argument("--list-size", type=int, default=30)
    f.add_argument("-q", type=int, default=1)
    f.add_argument("--budget", type=int, default=1500)
    f.add_argument("--max-iter", type=int, default=400)
    f.add_argument("--dedupe-eps", type=float, default=0.0)
    f.add_argument("--dominance", choices=["weak", "strict"], default="weak",
                   help="list pruning rule; strict keeps tied-balance points")

    s = sub.add_parser("sa2gd", parents=[common], help="SA2GD convergence-rate experiment")
    s.add_argument("--problem", default="quadratic", help="quadratic | isotropic")
    s.add_argument("--na", type=int, default=1)
    s.add_argument("--nb", type=int, default=1)
    s.add_argument("--T", dest="Ts", type=_int_list, default=[100, 316, 1000, 3162, 10000])
    s.add_argument("--seeds", type=int, default=20)
    s.add_argument("--sigma", type=float, default=1.0)

    v = sub.add_parser("verify", help="re-run a manifest and byte-compare its outputs")
    v.add_argument("manifest", type=Path)
    v.add_argument("--threads", type=int, default=None, help="override the recorded thread count")
    v.add_argument("-v", "--verbose", action="store_true")
    return p


# ---------------------------------------------------------------- helpers

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_dataset(args) -> Dataset:
    feats = args.features.split(",") if args.features else None
    ds = load_csv(args.dataset, feats, args.group_column)
    if args.subsample:
        ds = ds.subsample(args.subsample, np.random.default_rng(child_seed(args.seed, 99)))
        if ds.J < 2:
            raise DataError("subsample contains a single demographic group")
    if args.zscore:
        ds = ds.zscored()
    if args.clusters < 2:
        raise ConfigError("K must be >= 2")
    if args.clusters > ds.N:
        raise DataError(f"K={args.clusters} exceeds N={ds.N}")
    return ds


def _policy(args) -> SwapPolicy:
    return SwapPolicy(args.target, args.candidate_batch, args.batch_growth, args.growth_every)


def _config_of(args) -> dict:
    skip = {"out", "verbose", "command"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Path):
            v = str(v.resolve())
        elif isinstance(v, list):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        cfg[k] = v
    return cfg


def _write_manifest(path: Path, args, outputs: list[Path], root: Path, wall: float,
                    dataset_hash: str | None) -> None:
    manifest = {
        "command": args.command,
        "config": _config_of(args),
        "dataset_hash": dataset_hash,
        "master_seed": args.seed,
        "tool_version": __version__,
        "wall_seconds": round(wall, 3),
        "outputs": [{"path": str(o.relative_to(root)), "sha256": _sha256(o)} for o in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class _StagedDir:
    """Write into a sibling temp dir; swap it into place only on success."""

    def __init__(self, target: Path):
        self.target = target

    def __enter__(self) -> Path:
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=f".{self.target.name}.", dir=self.target.parent))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp, ignore_errors=True)
            return False
        if self.target.exists():
            shutil.rmtree(self.target)
        os.replace(self.tmp, self.target)
        return False


def _write_labels(path: Path, labels) -> None:
    path.write_text("".join(f"{int(v)}\n" for v in labels), encoding="ascii")


def read_labels(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int64, ndmin=1)


# ---------------------------------------------------------------- commands

def cmd_gen_data(args) -> int:
    if args.out is None:
        raise ConfigError("gen-data needs -o/--out FILE")
    t0 = time.perf_counter()
    if args.preset:
        spec = preset_spec(args.preset, seed=args.seed)
    else:
        try:
            data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"cannot read spec file {args.spec}: {e}") from None
        spec = SyntheticSpec.from_dict(data, seed=args.seed)
    ds = generate_gaussian_mixture(spec)
    out = args.out
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{out.name}.", dir=out.parent)
    os.close(fd)
    try:
        write_csv(ds, tmp)
        os.replace(tmp, out)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    _write_manifest(out.with_name(out.name + ".manifest.json"), args, [out], out.parent,
                    time.perf_counter() - t0, ds.content_hash())
    sizes = ds.group_sizes()
    print(f"wrote {ds.N} points (d={ds.d}, groups {':'.join(map(str, sizes))}) to {out}")
    return 0


def cmd_run(args) -> int:
    out = args.out or Path("run_out")
    ds = _load_dataset(args)
    t0 = time.perf_counter()
    cfg = AlternationConfig(args.na, args.nb, q=1, policy=_policy(args))
    rng = np.random.default_rng(child_seed(args.seed, 0))
    state = init_state(ds, args.clusters, rng)
    K, J = args.clusters, ds.J
    trace = [(0, cost_of_labels(ds.points, state.labels, K),
              balance_of_labels(ds.group_of, state.labels, K, J))]

    def record(it, st):
        trace.append((it + 1, cost_of_labels(ds.points, st.labels, K),
                      balance_of_labels(ds.group_of, st.labels, K, J)))

    for it in range(args.iters):
        safairkm_run(ds, state, cfg, rng, start_iteration=it, on_iteration=record)

    with _StagedDir(out) as tmp:
        with open(tmp / "trace.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "cost", "balance"])
            w.writerows((i, repr(c), repr(b)) for i, c, b in trace)
        _write_labels(tmp / "labels.txt", state.labels)
        outputs = [tmp / "trace.csv", tmp / "labels.txt"]
        if args.gnuplot:
            (tmp / "trace.gp").write_text(_GNUPLOT_TRACE)
            outputs.append(tmp / "trace.gp")
        _write_manifest(tmp / "manifest.json", args, outputs, tmp,
                        time.perf_counter() - t0, ds.content_hash())
    _, cost, bal = trace[-1]
    print(f"final cost={cost:.6g} balance={bal:.6g} after {args.iters} iterations -> {out}")
    return 0


def cmd_pareto(args) -> int:
    out = args.out or Path("pareto_out")
    ds = _load_dataset(args)
    threads = args.threads or _threads_default()
    t0 = time.perf_counter()
    archive = pareto_front_run(
        ds, args.clusters, args.pairs, n_init=args.list_size, q=args.q, budget=args.budget,
        max_iter=args.max_iter, master_seed=args.seed, policy=_policy(args),
        threads=threads, dedupe_eps=args.dedupe_eps, dominance=args.dominance,
    )
    front = archive.front()
    with _StagedDir(out) as tmp:
        (tmp / "labels").mkdir()
        outputs = []
        rows = []
        for i, pt in enumerate(front):
            rel = f"labels/point_{i:05d}.txt"
            _write_labels(tmp / rel, pt.label_array())
            outputs.append(tmp / rel)
            rows.append([repr(pt.cost), repr(pt.balance), pt.n_a, pt.n_b, pt.seed,
                         pt.iteration, rel])
        with open(tmp / "front.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FRONT_HEADER)
            w.writerows(rows)
        with open(tmp / "history.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "size", "added", "removed"])
            w.writerows([h["iteration"], h["size"], h["added"], h["removed"]]
                        for h in archive.history)
        outputs = [tmp / "front.csv", tmp / "history.csv"] + outputs
        if args.gnuplot:
            (tmp / "front.gp").write_text(_GNUPLOT_FRONT)
            outputs.append(tmp / "front.gp")
        _write_manifest(tmp / "manifest.json", args, outputs, tmp,
                        time.perf_counter() - t0, ds.content_hash())
    bals = [p.balance for p in front]
    print(f"{len(front)} front points after {archive.iteration} iterations; "
          f"balance range [{min(bals):.4g}, {max(bals):.4g}] -> {out}")
    return 0


def cmd_sa2gd(args) -> int:
    out = args.out or Path("sa2gd_out")
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    t0 = time.perf_counter()
    problem = preset_problem(args.problem, sigma=args.sigma)
    seeds = [child_seed(args.seed, i) for i in range(args.seeds)]
    exp = rate_experiment(problem, args.na, args.nb, args.Ts, seeds, x0=PRESET_X0[args.problem])
    lam = target_weight(args.na, args.nb)
    xstar = problem.minimizer(lam)
    # noiseless companion run at the largest T for the converged point
    clean = preset_problem(args.problem, sigma=0.0)
    x_clean = sa2gd_run(clean, PRESET_X0[args.problem], args.na, args.nb, max(exp.Ts),
                        record_gaps=False).final
    summary = dict(exp.summary)
    summary.update({
        "n_a": args.na, "n_b": args.nb, "lambda": lam, "sigma": args.sigma,
        "T": exp.Ts, "averaged_min_gap": [g for _, g in exp.averaged],
        "x_star": xstar.tolist(), "x_noiseless_final": x_clean.tolist(),
        "noiseless_distance": float(np.linalg.norm(x_clean - xstar)),
        "x_noisy_seed_mean": exp.final_mean.tolist(),
    })
    with _StagedDir(out) as tmp:
        with open(tmp / "rate.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["T", "seed", "min_gap"])
            w.writerows((T, s, repr(g)) for T, s, g in exp.per_seed)
        (tmp / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        _write_manifest(tmp / "manifest.json", args, [tmp / "rate.csv", tmp / "summary.json"],
                        tmp, time.perf_counter() - t0, None)
    print(f"slope={summary['slope']:.4f} (95% CI {summary['ci'][0]:.3f}..{summary['ci'][1]:.3f})")
    print(f"x*({lam:g}) = {np.array2string(xstar, precision=6)}; noiseless x_T = "
          f"{np.array2string(x_clean, precision=6)}; distance {summary['noiseless_distance']:.3e}")
    return 0


def cmd_verify(args) -> int:
    mpath = args.manifest
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"cannot read manifest {mpath}: {e}") from None
    cfg = dict(manifest["config"])
    command = manifest["command"]
    if args.threads is not None and "threads" in cfg:
        cfg["threads"] = args.threads
    root = mpath.parent
    with tempfile.TemporaryDirectory() as td:
        target = Path(td) / ("out.csv" if command == "gen-data" else "out")
        rerun = argparse.Namespace(**cfg, out=target, verbose=False, command=command)
        for key in ("dataset", "spec"):
            if rerun.__dict__.get(key):
                setattr(rerun, key, Path(rerun.__dict__[key]))
        if cfg.get("pairs"):
            rerun.pairs = [tuple(p) for p in cfg["pairs"]]
        COMMANDS[command](rerun)
        new_root = target.parent if command == "gen-data" else target
        bad = []
        for entry in manifest["outputs"]:
            rel = entry["path"]
            if command == "gen-data":
                fresh = target
            else:
                fresh = new_root / rel
            if not fresh.exists() or _sha256(fresh) != entry["sha256"]:
                bad.append(f"{rel}: re-run differs from manifest")
                continue
            on_disk = root / rel
            if on_disk.exists() and on_disk.read_bytes() != fresh.read_bytes():
                bad.append(f"{rel}: file on disk differs from re-run")
    if bad:
        for b in bad:
            print(f"MISMATCH {b}", file=sys.stderr)
        return 3
    print(f"verified {len(manifest['outputs'])} output(s) of '{command}': byte-identical")
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "run": cmd_run,
    "pareto": cmd_pareto,
    "sa2gd": cmd_sa2gd,
    "verify": cmd_verify,
}

_GNUPLOT_TRACE = """set datafile separator ','
set key autotitle columnhead
set multiplot layout 1,2
set xlabel 'iteration'; set ylabel 'cost'
plot 'trace.csv' using 1:2 with lines
set ylabel 'balance'
plot 'trace.csv' using 1:3 with lines
unset multiplot
"""

_GNUPLOT_FRONT = """set datafile separator ','
set key off
set xlabel 'clustering cost'; set ylabel 'clustering balance'
plot 'front.csv' every ::1 using 1:2 with points pt 7
"""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FairKMError as e:
        print(f"fairkm: error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:  # noqa: BLE001
        log.exception("unexpected failure")
        print(f"fairkm: runtime error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
