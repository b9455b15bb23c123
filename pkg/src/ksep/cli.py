"""Command-line interface: ``ksep census|analyze|learn|table1|parity-check``.

JSON goes to stdout (or ``--output``) with sorted keys and no timestamps, so
identical arguments give byte-identical output.  Human-readable summaries and
golden diffs go to stderr.  Exit codes: 0 success, 1 golden mismatch or
non-pure fit, 2 invalid arguments or input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import enumeration as en
from . import golden
from .boolfn import MAX_CENSUS_N, BooleanFunction, from_index, parity
from .data import (CVPlan, DataError, LabeledDataset, complexity_index, crossvalidate,
                   from_boolean, load_csv)
from .learner import TrainConfig, fit_interval_model, parity_cos
from .projection import Direction, profile, profile_points

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SETS = ("canonical", "perturbed-canonical", "grid", "fixed", "file")


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------------


def _emit(args, payload: dict, csv_rows: list[list] | None) -> None:
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerows(csv_rows or [])
        text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _check_n(n: int) -> None:
    if n > MAX_CENSUS_N:
        raise UsageError(
            f"n={n} is out of range: n={MAX_CENSUS_N + 1} already has 2**{1 << (MAX_CENSUS_N + 1)} "
            f"Boolean functions, so exhaustive censuses stop at n={MAX_CENSUS_N}")
    if n < 1:
        raise UsageError("n must be >= 1")


def _parse_direction(text: str, n: int | None = None) -> Direction:
    try:
        w = Direction.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad direction {text!r}: {exc}") from None
    if n is not None and w.n != n:
        raise UsageError(f"direction {text!r} has {w.n} weights, expected {n}")
    return w


def _read_directions(path: str, n: int) -> list[Direction]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read directions file: {exc}") from None
    ws = [_parse_direction(s.strip(), n) for s in lines if s.strip() and not s.startswith("#")]
    if not ws:
        raise UsageError(f"{path}: no directions")
    return ws


def _direction_set(args, n: int):
    if args.set == "canonical":
        return en.canonical_directions(n)
    if args.set == "perturbed-canonical":
        return en.perturbed_canonical(n, args.perturbation)
    if args.set == "grid":
        return en.fractional_grid(n)
    if args.set == "file":
        if not args.directions:
            raise UsageError("--set file needs --directions PATH")
        return en.DirectionSet(tuple(_read_directions(args.directions, n)), "file")
    raise UsageError(f"--set {args.set} is not a direction set here")


def _workers(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    return en.default_workers()


def _hist_rows(c: en.SeparabilityCensus) -> list[list]:
    rows = [["k", "count"]]
    rows += [[k, v] for k, v in sorted(c.histogram.items())]
    rows.append(["unresolved", c.unresolved])
    return rows


# -- census ------------------------------------------------------------------------


def _golden_precheck(args, n: int, w: Direction | None) -> None:
    """Reject ``--golden`` up front when no embedded counts apply."""
    if args.convention_sweep:
        if n != 4:
            raise UsageError("golden counts for the convention sweep exist only for n=4")
        return
    if args.set == "fixed":
        if len(profile(from_index(n, 0), w).groups) != (1 << n):
            raise UsageError("golden counts for a fixed direction exist only for tie-free directions")
        return
    known = {("perturbed-canonical", 3), ("perturbed-canonical", 4), ("canonical", 4), ("grid", 4)}
    if (args.set, n) not in known:
        raise UsageError(f"no embedded golden counts for --set {args.set} at n={n}")


def _golden_census(args, n: int, c: en.SeparabilityCensus) -> list[str]:
    """Diff lines against the embedded counts."""
    if args.set == "fixed":
        expected = {k: en.tie_free_histogram(n, k) for k in range(1, (1 << n) + 1)}
        return golden.diff_histogram(expected, c.histogram)
    if args.set == "perturbed-canonical" and n == 3:
        return golden.diff_histogram(golden.BEST_N3_PERTURBED, c.histogram)
    if args.set in ("perturbed-canonical", "canonical") and n == 4:
        return golden.diff_histogram(golden.BEST_N4_CANONICAL, c.histogram)
    if args.set == "grid" and n == 4:
        diff = []
        if c.histogram.get(2, 0) != golden.GRID_N4_SEPARABLE:
            diff.append(f"k=2: expected {golden.GRID_N4_SEPARABLE}, got {c.histogram.get(2, 0)}")
        if c.max_k != golden.GRID_N4_MAX_K:
            diff.append(f"max k: expected {golden.GRID_N4_MAX_K}, got {c.max_k} "
                        f"({c.histogram.get(c.max_k, 0)} functions at k={c.max_k})")
        return diff
    return []


def cmd_census(args) -> int:
    n = args.n
    _check_n(n)
    if args.convention_sweep and args.set != "canonical":
        raise UsageError("--convention-sweep applies to --set canonical")
    if args.set == "fixed" and not args.dir:
        raise UsageError("--set fixed needs --dir")
    workers = _workers(args)
    w = _parse_direction(args.dir, n) if args.dir else None
    if args.golden:
        _golden_precheck(args, n, w)
    payload = {"n": n, "set": args.set, "seed": args.seed, "threads": workers}
    diff: list[str] = []

    if args.convention_sweep:
        results = en.convention_sweep(n, workers=workers)
        payload["conventions"] = {k: c.to_json() for k, c in results.items()}
        matching = []
        if n == 4:
            matching = [k for k, c in results.items()
                        if not golden.diff_histogram(golden.BEST_N4_CANONICAL, c.histogram)]
            payload["matching_convention"] = matching
        rows = [["convention", "k", "count"]]
        for name, c in results.items():
            rows += [[name, k, v] for k, v in sorted(c.histogram.items())]
            rows.append([name, "unresolved", c.unresolved])
        if args.golden and not matching:
            for name, c in results.items():
                diff += [f"{name}: {d}" for d in
                         golden.diff_histogram(golden.BEST_N4_CANONICAL, c.histogram)]
        _emit(args, payload, rows)
        for name, c in results.items():
            _note(f"{name}: {dict(sorted(c.histogram.items()))} unresolved={c.unresolved}")
        if matching:
            _note(f"matching convention: {', '.join(matching)}")
    else:
        if args.set == "fixed":
            c = en.census_fixed(n, w)
        else:
            c = en.census_best(n, _direction_set(args, n), workers=workers)
        if args.set == "perturbed-canonical":
            payload["perturbation"] = args.perturbation
        payload["census"] = c.to_json(records=args.records and args.format == "json")
        if args.records and args.format == "csv":
            rows = [["index", "k", "direction", "min_gap"]]
            for r in c.records():
                rows.append([r["index"], "" if r["k"] is None else r["k"],
                             "" if r["direction"] is None else ",".join(r["direction"]),
                             "" if r["min_gap"] is None else r["min_gap"]])
        else:
            rows = _hist_rows(c)
        if args.golden:
            diff = _golden_census(args, n, c)
        _emit(args, payload, rows)
        _note(f"histogram {dict(sorted(c.histogram.items()))} unresolved={c.unresolved} "
              f"degenerate_only={c.degenerate_only} partitions={c.n_partitions}")

    if args.golden:
        if diff:
            _note("golden mismatch:")
            for d in diff:
                _note("  " + d)
            return EXIT_FAIL
        _note("golden: match")
    return EXIT_OK


# -- analyze -----------------------------------------------------------------------


def _function_from_args(args) -> BooleanFunction:
    if args.n is None or args.fn is None:
        raise UsageError("give --n and --fn, or --csv")
    try:
        return from_index(args.n, args.fn)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _profile_row(w: Direction | str, p) -> list:
    gap = "" if p.min_gap is None else str(p.min_gap)
    return [str(w), "" if p.k is None else p.k, gap, p.pattern_string()]


def cmd_analyze(args) -> int:
    rows = [["direction", "k", "min_gap", "pattern"]]
    if args.csv:
        data = load_csv(args.csv, delimiter=args.delimiter)
        payload = {"source": data.provenance, "points": len(data)}
        if args.dir:
            w = _parse_direction(args.dir, data.dim)
            pts = data.points
            if np.all(pts == np.round(pts)):
                # integer coordinates keep the profile exact
                pts = pts.astype(np.int64).tolist()
            p = profile_points(pts, data.labels, w, atol=args.atol)
            payload["profile"] = p.to_json()
            payload["direction"] = w.to_json()
            rows.append(_profile_row(w, p))
            _note(f"k={p.k} min_gap={p.min_gap}")
        else:
            rep = complexity_index(data, TrainConfig(seed=args.seed))
            payload["complexity"] = rep.to_json()
            payload["seed"] = args.seed
            rows = [["k", "pure", "min_gap", "cluster_sizes"],
                    [rep.k, rep.pure, rep.min_gap, " ".join(map(str, rep.cluster_sizes))]]
            _note(f"fitted k={rep.k} pure={rep.pure} min_gap={rep.min_gap}")
        _emit(args, payload, rows)
        return EXIT_OK

    f = _function_from_args(args)
    payload = {"function": f.to_json(), "truth_table": format(f.table, f"0{f.n_vertices}b")}
    if args.dir:
        w = _parse_direction(args.dir, f.n)
        p = profile(f, w)
        payload["direction"] = w.to_json()
        payload["profile"] = p.to_json()
        payload["pattern"] = p.pattern_string()
        rows.append(_profile_row(w, p))
        _note(f"k={p.k} min_gap={p.min_gap} pattern={p.pattern_string() or 'invalid'}")
    else:
        _check_n(f.n)
        if args.set == "grid":
            W, den = en.grid_matrix(f.n)
        else:
            W, den = en.directions_matrix(list(_direction_set(args, f.n)))
        order = en.rank_directions(f, W)
        payload["set"] = args.set
        payload["n_directions"] = len(W)
        payload["n_best"] = len(order)
        top = []
        for i in order[: args.top]:
            w = Direction(tuple(int(a) for a in W[i]), den)
            top.append((w, profile(f, w)))
        payload["k"] = top[0][1].k if top else None
        payload["best"] = [{"direction": w.to_json(), "profile": p.to_json(),
                            "pattern": p.pattern_string()} for w, p in top]
        rows += [_profile_row(w, p) for w, p in top]
        if top:
            _note(f"k={payload['k']} via {len(order)} direction(s); widest margin {top[0][0]} "
                  f"gap={top[0][1].min_gap}")
        else:
            _note("no valid direction in the set")
    _emit(args, payload, rows)
    return EXIT_OK


# -- learn -------------------------------------------------------------------------


def _learn_data(args) -> LabeledDataset:
    given = sum(x is not None for x in (args.csv, args.parity, args.fn))
    if given != 1:
        raise UsageError("give exactly one of --csv, --parity, --fn (with --fn-n)")
    if args.csv:
        data = load_csv(args.csv, delimiter=args.delimiter, header=not args.no_header,
                        label_column=args.label_column, positive=args.positive)
    elif args.parity is not None:
        if not 1 <= args.parity <= 16:
            raise UsageError("--parity must be in 1..16")
        data = from_boolean(parity(args.parity))
    else:
        if args.fn_n is None:
            raise UsageError("--fn needs --fn-n")
        try:
            data = from_boolean(from_index(args.fn_n, args.fn))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if data.degenerate:
        raise UsageError(f"{data.provenance}: only one class present, nothing to separate")
    if args.standardize:
        data = data.standardized()
    return data


def cmd_learn(args) -> int:
    data = _learn_data(args)
    try:
        cfg = TrainConfig(restarts=args.restarts, max_iters=args.max_iters,
                          learning_rate=args.learning_rate, k_max=args.k_max,
                          k_min=args.k_min, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    model, report = fit_interval_model(data.points, data.labels, cfg)
    payload = {"source": data.provenance, "points": len(data), "seed": args.seed,
               "model": model.to_json(), "report": report.to_json(),
               "parameter_counts": model.parameter_counts()}
    if args.cv:
        plan = CVPlan(args.cv, args.folds, args.seed)
        payload["cv"] = crossvalidate(data, cfg, plan, workers=_workers(args)).to_json()
    if args.model_out:
        Path(args.model_out).write_text(json.dumps(model.to_json(), sort_keys=True, indent=2) + "\n")
    rows = [["k", "pure", "accuracy", "min_gap", "cluster_sizes"],
            [report.k, report.pure, report.accuracy,
             "" if report.min_gap is None else report.min_gap,
             " ".join(map(str, report.cluster_sizes))]]
    _emit(args, payload, rows)
    _note(f"k={report.k} pure={report.pure} accuracy={report.accuracy:.4f} "
          f"min_gap={report.min_gap}")
    if "cv" in payload:
        _note(f"cv accuracy {payload['cv']['mean_accuracy']:.4f} "
              f"+- {payload['cv']['std_accuracy']:.4f}")
    if not report.pure:
        _note("purity not reached within k_max; model written with pure=false")
        return EXIT_FAIL
    return EXIT_OK


# -- table1 ------------------------------------------------------------------------


def cmd_table1(args) -> int:
    rep = en.table1_report(3)
    rows = [["direction", "k2", "k3", "k4"]] + [list(r) for r in rep.rows]
    _emit(args, rep.to_json(), rows)
    for label, a, b, c in rep.rows:
        _note(f"{label:>6}  {a} {b} {c}")
    _note(f"totals {rep.totals}  distinct {rep.distinct}")
    if args.golden:
        diff = []
        # rows follow the reference order; the last label differs only by overall sign
        for (label, *got), (ref, exp) in zip(rep.rows, golden.TABLE1.items()):
            if tuple(got) != exp:
                diff.append(f"{label} ({ref}): expected {exp}, got {tuple(got)}")
        if rep.totals != golden.TABLE1_TOTALS:
            diff.append(f"totals: expected {golden.TABLE1_TOTALS}, got {rep.totals}")
        if diff:
            _note("golden mismatch:")
            for d in diff:
                _note("  " + d)
            return EXIT_FAIL
        _note("golden: match")
    return EXIT_OK


# -- parity-check ------------------------------------------------------------------


def cmd_parity_check(args) -> int:
    """Parity facts: cos-form labels, k=n+1 on the main diagonal, optional learning."""
    if not 1 <= args.n_max <= 16:
        raise UsageError("--n-max must be in 1..16")
    ok = True
    results = []
    for n in range(1, args.n_max + 1):
        f = parity(n)
        X = np.array([[v >> (n - 1 - i) & 1 for i in range(n)] for v in range(1 << n)])
        odd = parity_cos(X) == -1
        cos_ok = bool(np.array_equal(odd, [f.value(v) for v in range(1 << n)]))
        k_diag = profile(f, Direction.of([1] * n)).k
        entry = {"n": n, "parity_cos_matches": cos_ok, "k_main_diagonal": k_diag}
        good = cos_ok and k_diag == n + 1
        if n >= 2 and n <= args.learn_max:
            model, rep = fit_interval_model(X, [f.value(v) for v in range(1 << n)],
                                            TrainConfig(seed=args.seed))
            entry["learned_k"] = rep.k
            entry["learned_accuracy"] = rep.accuracy
            good = good and rep.pure and rep.k == n + 1 and rep.accuracy == 1.0
        entry["ok"] = good
        ok = ok and good
        results.append(entry)
    rows = [["n", "parity_cos_matches", "k_main_diagonal", "learned_k", "ok"]]
    rows += [[e["n"], e["parity_cos_matches"], e["k_main_diagonal"], e.get("learned_k", ""),
              e["ok"]] for e in results]
    _emit(args, {"seed": args.seed, "results": results, "ok": ok}, rows)
    _note("parity-check: " + ("all ok" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    p.add_argument("--output", "-o", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="random seed, echoed into output (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $KSEP_THREADS, else CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksep", description="k-separability tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="histogram of minimal k over all n-bit functions")
    _common(p)
    p.add_argument("--n", type=int, required=True, help="number of bits (1..4)")
    p.add_argument("--set", choices=SETS, default="perturbed-canonical",
                   help="direction set (fixed: one direction given by --dir)")
    p.add_argument("--dir", help="direction for --set fixed, e.g. 1,2,4 or 3/4,1,-1/4")
    p.add_argument("--directions", metavar="PATH", help="file with one direction per line")
    p.add_argument("--perturbation", choices=en.PERTURBATION_SCHEMES, default="linear",
                   help="tie-breaking shift for the perturbed set: linear adds i/100 to weight i, "
                        "binary adds 2**(i-1)/100")
    p.add_argument("--convention-sweep", action="store_true",
                   help="with --set canonical: run pure and both perturbed conventions")
    p.add_argument("--golden", action="store_true", help="diff against embedded reference counts")
    p.add_argument("--records", action="store_true",
                   help="include per-function records (index, k, direction, min_gap)")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("analyze", help="projection profile of one function or dataset")
    _common(p)
    p.add_argument("--n", type=int, help="number of bits")
    p.add_argument("--fn", type=int, help="truth-table index (bit v = value at vertex v)")
    p.add_argument("--csv", help="analyze a CSV dataset instead of a Boolean function")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--dir", help="direction to profile; omitted: search --set")
    p.add_argument("--set", choices=("canonical", "perturbed-canonical", "grid", "file"),
                   default="grid", help="direction set searched when --dir is omitted")
    p.add_argument("--directions", metavar="PATH", help="file with one direction per line")
    p.add_argument("--perturbation", choices=en.PERTURBATION_SCHEMES, default="linear")
    p.add_argument("--top", type=int, default=5, help="best directions to list (default 5)")
    p.add_argument("--atol", type=float, default=0.0,
                   help="projection values closer than this are merged (CSV data)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("learn", help="fit an interval model by gradient descent")
    _common(p)
    p.add_argument("--csv", help="two-class CSV dataset")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--label-column", default=-1,
                   type=lambda s: int(s) if s.lstrip("-").isdigit() else s,
                   help="label column index or name (default: last)")
    p.add_argument("--positive", help="label value of the plus class")
    p.add_argument("--parity", type=int, metavar="N", help="learn N-bit parity")
    p.add_argument("--fn", type=int, help="truth-table index of a Boolean function")
    p.add_argument("--fn-n", type=int, help="number of bits for --fn")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--k-min", type=int, default=2, help="smallest k tried (default 2)")
    p.add_argument("--k-max", type=int, default=None, help="largest k tried (default dim+1)")
    p.add_argument("--standardize", action="store_true", help="z-score features first")
    p.add_argument("--model-out", metavar="PATH", help="write the model JSON here")
    p.add_argument("--cv", choices=("kfold", "loo"), help="also cross-validate")
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("table1", help="per-direction 2/3/4-separable counts for n=3")
    _common(p)
    p.add_argument("--golden", action="store_true", help="diff against embedded reference counts")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("parity-check", help="check parity separability facts for n=1..N")
    _common(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--learn-max", type=int, default=0,
                   help="also fit the learner for n=2..LEARN_MAX and require k=n+1")
    p.set_defaults(func=cmd_parity_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DataError, ValueError) as exc:
        print(f"ksep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
