"""Command-line interface.

    fockcascade design london 1 0.0 --tsq 0.62 --out s.json
    fockcascade verify s.json superpos01 0.6 0
    fockcascade sample s.json superpos01 0.6 0 --shots 1000000 --seed 7
    fockcascade figures 2 --out fig2.csv
    fockcascade phase trig 1 vacuum --chi 0

Exit status: 0 success, 1 usage error, 2 verification failure.
"""
import argparse
import datetime
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cat, fock, oracle, phase, sampler
from .errors import (
    AmplitudeTooLargeForCutoff,
    DesignVerificationFailed,
    FockCascadeError,
    InconsistentProbability,
)
from .scheme import (
    BeamSplitter,
    Scheme,
    alphas_from_zeros,
    design_scheme,
    efficiency_closed_form,
    efficiency_numeric,
    joint_event_probability,
)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
VERIFY_RTOL = 1e-6
ROUND_TRIP_RTOL = 1e-9
FIGURE_CHECK_RTOL = 1e-8
#: Efficiencies below this are too small for a meaningful numeric re-check.
FIGURE_CHECK_FLOOR = 1e-6


class UsageError(Exception):
    pass


class VerificationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    return f"{float(x):.17g}"


# -- parsing helpers -------------------------------------------------------------

def _num(text, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as {kind.__name__}") from None


def _expect(words, n, what):
    if len(words) != n:
        raise UsageError(f"{what} takes {n - 1} argument(s), got {len(words) - 1}")


def parse_rho(words, cutoff=None):
    """Density matrix from the words describing an input state."""
    if not words:
        raise UsageError("missing input state")
    kind = words[0]
    if kind == "vacuum":
        _expect(words, 1, "vacuum")
        return fock.pure_density(fock.basis(cutoff or 1, 0))
    if kind == "fock":
        _expect(words, 2, "fock")
        n = _num(words[1], int)
        return fock.pure_density(fock.basis(max(cutoff or 0, n + 1), n))
    if kind == "coherent":
        _expect(words, 3, "coherent")
        a = complex(_num(words[1]), _num(words[2]))
        dim = cutoff or fock.coherent_cutoff(a)
        return fock.pure_density(fock.coherent_state(dim, a))
    if kind == "superpos01":
        _expect(words, 3, "superpos01")
        z = complex(_num(words[1]), _num(words[2]))
        return fock.pure_density(phase.superposition01(z, max(cutoff or 0, 2)))
    if kind == "file":
        _expect(words, 2, "file")
        return load_density(words[1])
    raise UsageError(f"unknown input state {kind!r} (vacuum | fock | coherent | superpos01 | file)")


def load_density(path):
    """``{"dim": d, "entries": [[re, im], ...]}`` in row-major order."""
    with open(path) as fh:
        doc = json.load(fh)
    dim = int(doc["dim"])
    ent = np.asarray(doc["entries"], dtype=float)
    if ent.shape != (dim * dim, 2):
        raise UsageError(f"{path}: expected {dim * dim} [re, im] pairs")
    return (ent[:, 0] + 1j * ent[:, 1]).reshape(dim, dim)


def parse_target(words):
    """Target state and a short label from the words describing it."""
    if not words:
        raise UsageError("missing target")
    kind = words[0]
    if kind == "fock":
        _expect(words, 2, "fock")
        n = _num(words[1], int)
        if n < 1:
            raise UsageError("fock target needs n >= 1")
        return fock.basis(n + 1, n)
    if kind == "london":
        _expect(words, 3, "london")
        return phase.london_phase_state(_num(words[1], int), _num(words[2]))
    if kind == "trig":
        _expect(words, 4, "trig")
        return phase.trig_phase_state(_num(words[1], int), _num(words[2]), _num(words[3]))
    if kind == "cat":
        _expect(words, 3, "cat")
        psi, _ = cat.cat_like_state(_num(words[1], int), _num(words[2], complex))
        return psi
    if kind == "amps":
        if len(words) < 3:
            raise UsageError("amps needs at least two amplitudes")
        return np.array([_num(w, complex) for w in words[1:]])
    raise UsageError(f"unknown target {kind!r} (amps | fock | london | trig | cat)")


def bs_from_args(args):
    if not 0.0 < args.tsq < 1.0:
        raise UsageError(f"--tsq must lie in (0, 1), got {args.tsq}")
    return BeamSplitter.from_tsq(args.tsq)


def load_scheme(path):
    with open(path) as fh:
        doc = json.load(fh)
    try:
        return Scheme.from_dict(doc), doc
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: not a scheme file ({exc})") from None


def resolved_config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "out")}
    if not args.deterministic:
        cfg["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return cfg


def emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def dump_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_table(columns, rows, args, extra_comments=()):
    if args.format == "json":
        doc = {"config": resolved_config(args), "columns": columns,
               "rows": [[float(x) for x in r] for r in rows]}
        for line in extra_comments:
            doc.setdefault("notes", []).append(line)
        emit(dump_json(doc), args.out)
        return
    lines = ["# " + json.dumps(resolved_config(args), sort_keys=True)]
    lines += [f"# {c}" for c in extra_comments]
    lines.append(",".join(columns))
    lines += [",".join(fmt(x) for x in r) for r in rows]
    emit("\n".join(lines) + "\n", args.out)


# -- commands --------------------------------------------------------------------

def cmd_design(args):
    psi = parse_target(args.target)
    bs = bs_from_args(args)
    try:
        sch, report = design_scheme(psi, bs, merge_degenerate=not args.no_merge)
    except DesignVerificationFailed as exc:
        print(f"design verification failed: {exc} (fidelity {exc.fidelity})", file=sys.stderr)
        return EXIT_VERIFY
    except AmplitudeTooLargeForCutoff as exc:
        print(f"design cannot be verified: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.cutoff:
        sch = Scheme(sch.bs, sch.stages, max(args.cutoff, sch.cutoff))
    doc = sch.to_dict()
    doc["report"] = report.to_dict()
    doc["config"] = resolved_config(args)
    emit(dump_json(doc), args.out)
    if args.out not in (None, "-"):
        print(f"{len(sch.stages)} stage(s), clicks {[s.clicks for s in sch.stages]}, "
              f"efficiency {fmt(report.efficiency_numeric)}")
    return EXIT_OK


def cmd_verify(args):
    sch, doc = load_scheme(args.scheme)
    rho = fock.check_density(parse_rho(args.rho, args.cutoff))
    status = EXIT_OK
    p_closed = joint_event_probability(rho, sch)
    p_oracle = oracle.cascade_probability_oracle(rho, sch)
    scale = max(abs(p_closed), abs(p_oracle))
    rel = abs(p_closed - p_oracle) / scale if scale > 0 else 0.0
    out = {
        "probability_closed": p_closed,
        "probability_oracle": p_oracle,
        "relative_difference": rel,
    }
    if rel > VERIFY_RTOL and abs(p_closed - p_oracle) > 1e-15:
        status = EXIT_VERIFY
    rep = doc.get("report")
    if rep:
        eff = efficiency_numeric(sch)
        out["efficiency_numeric"] = eff
        for key in ("efficiency_numeric", "efficiency_closed"):
            diff = abs(eff - rep[key]) / rep[key]
            out[f"recorded_{key}_relative_difference"] = diff
            if diff > ROUND_TRIP_RTOL:
                status = EXIT_VERIFY
        try:
            out["overlap"] = p_closed / eff if p_closed <= eff * (1 + 1e-9) else None
        except ZeroDivisionError:
            out["overlap"] = None
    out["ok"] = status == EXIT_OK
    emit(dump_json(out), args.out)
    return status


def cmd_sample(args):
    sch, _ = load_scheme(args.scheme)
    rho = parse_rho(args.rho, args.cutoff)
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    counts = sampler.sample_cascade(rho, sch, args.shots, args.seed,
                                    marginals=args.marginals, workers=args.workers)
    eff = efficiency_numeric(sch)
    est = sampler.estimate_overlap(counts, eff)
    doc = counts.to_dict()
    doc.update(efficiency=eff, estimate=est.estimate, stderr=est.stderr, no_hits=est.no_hits,
               config=resolved_config(args))
    emit(dump_json(doc), args.out)
    return EXIT_OK


def cmd_phase(args):
    rho = parse_rho(args.rho, args.cutoff)
    if args.kind == "canonical":
        grid = phase.canonical_grid(args.grid)
        bs = BeamSplitter.from_tsq(args.tsq) if args.tsq else None
        vals = phase.canonical_phase_distribution(rho, args.N, grid, bs)
        write_table(["phi", "prob"], zip(grid, vals), args)
    else:
        grid = phase.trig_grid(args.grid)
        bs = BeamSplitter.from_tsq(args.tsq) if args.tsq else None
        vals, flags = phase.trig_distribution(rho, args.chi, args.N, grid, bs, return_flags=True)
        write_table(["phi", "prob", "direct_only"], zip(grid, vals, flags.astype(float)), args,
                    [f"{int(flags.sum())} point(s) evaluated directly (scheme infeasible)"])
    return EXIT_OK


# -- figures ---------------------------------------------------------------------

def _tabs_grid(points):
    return np.arange(1, points + 1) / (points + 1)


def _london_zeros(N):
    return fock.zeros_of_state(phase.london_phase_state(N, 0.0))


def fig2_rows(points):
    tabs = _tabs_grid(points)
    zeros = {N: _london_zeros(N) for N in range(1, 9)}
    rows = []
    for t in tabs:
        bs = BeamSplitter.from_tsq(t * t)
        row = [t]
        for N in range(1, 9):
            al = alphas_from_zeros(zeros[N], bs)
            row.append(efficiency_closed_form(phase.london_phase_state(N, 0.0), bs, al))
        rows.append(row)
    return ["Tabs"] + [f"eff_N{N}" for N in range(1, 9)], rows


def fig3_rows(points):
    rows = []
    for phi in phase.trig_grid(points):
        for t in _tabs_grid(points):
            rows.append([phi, t, phase.trig_efficiency(phi, BeamSplitter.from_tsq(t * t))])
    return ["phi", "Tabs", "eff"], rows


def fig4_rows(points):
    rows = []
    for phi in np.linspace(0.0, math.pi, points):
        rows.append([phi, phase.optimal_transmittance(phi), phase.max_trig_efficiency(phi)])
    return ["phi", "tsq_opt", "eff_max"], rows


def fig6_rows(points):
    rows = []
    for t in _tabs_grid(points):
        bs = BeamSplitter.from_tsq(t * t)
        rows.append([t] + [cat.cat_efficiency_closed_form(n, math.sqrt(n), bs) for n in range(1, 9)])
    return ["Tabs"] + [f"eff_n{n}" for n in range(1, 9)], rows


def _numeric_value(which, row, col):
    """``efficiency_numeric`` of the designed scheme behind one figure entry."""
    if which == 2:
        bs = BeamSplitter.from_tsq(row[0] ** 2)
        sch, _ = design_scheme(phase.london_phase_state(col, 0.0), bs, max_workspace=160)
        return efficiency_numeric(sch)
    if which in (3, 4):
        phi = row[0]
        if abs(math.cos(phi)) < 1e-6 or abs(math.sin(2 * phi)) < 1e-6:
            return None
        bs = BeamSplitter.from_tsq(row[1] ** 2 if which == 3 else row[1])
        sch = phase.trig_phase_scheme(phi, 0.0, bs)
        if sch.cutoff > phase.PIPELINE_CUTOFF_BUDGET:
            return None
        return efficiency_numeric(sch)
    if which == 6:
        bs = BeamSplitter.from_tsq(row[0] ** 2)
        sch, _ = cat.cat_scheme(col, math.sqrt(col), bs)
        return efficiency_numeric(sch)
    raise ValueError(which)


FIGURES = {2: fig2_rows, 3: fig3_rows, 4: fig4_rows, 6: fig6_rows}


def cross_check(which, columns, rows, workers):
    """Re-derive about 1% of the entries numerically; returns (checked, worst)."""
    cells = [(r, c) for r in range(len(rows)) for c in range(1, len(columns))
             if which not in (3, 4) or c == len(columns) - 1]
    step = max(1, len(cells) // max(1, len(cells) // 100))
    picks = cells[step // 2 :: step]

    def one(cell):
        r, c = cell
        closed = rows[r][c]
        if not closed > FIGURE_CHECK_FLOOR:
            return None
        col = c if which in (2, 6) else None
        try:
            num = _numeric_value(which, rows[r], col)
        except FockCascadeError:
            return None
        return None if num is None else abs(num - closed) / closed

    with ThreadPoolExecutor(max_workers=workers) as pool:
        errs = [e for e in pool.map(one, picks) if e is not None]
    return len(errs), max(errs, default=0.0)


def cmd_figures(args):
    which = args.which
    columns, rows = FIGURES[which](args.grid)
    checked, worst = cross_check(which, columns, rows, args.workers or os.cpu_count() or 1)
    note = f"numeric cross-check: {checked} point(s), worst relative difference {worst:.3g}"
    write_table(columns, rows, args, [note])
    if worst > FIGURE_CHECK_RTOL:
        print(f"figure {which}: {note}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# -- argument parser ---------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults (flags override it)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--deterministic", action="store_true",
                        help="omit the timestamp so output is byte-for-byte reproducible")
    common.add_argument("--cutoff", type=int, default=None, help="Fock cutoff for built-in input states")
    common.add_argument("--workers", type=int, default=None, help="worker threads")

    p = _Parser(prog="fockcascade", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("design", parents=[common], help="design a cascade for a target state")
    d.add_argument("target", nargs="+", help="amps A0 A1 .. | fock n | london N phi | trig N phi chi | cat n beta")
    d.add_argument("--tsq", type=float, default=0.62, help="|T|^2 of every beam splitter")
    d.add_argument("--no-merge", action="store_true", help="one single-click stage per zero")
    d.set_defaults(func=cmd_design)

    v = sub.add_parser("verify", parents=[common], help="check a scheme against the two-mode oracle")
    v.add_argument("scheme")
    v.add_argument("rho", nargs="+", help="vacuum | fock n | coherent re im | superpos01 re im | file PATH")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", parents=[common], help="Monte Carlo counting run")
    s.add_argument("scheme")
    s.add_argument("rho", nargs="+")
    s.add_argument("--shots", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--marginals", action="store_true", help="record per-stage histograms")
    s.set_defaults(func=cmd_sample)

    f = sub.add_parser("figures", parents=[common], help="efficiency curves as CSV")
    f.add_argument("which", type=int, choices=sorted(FIGURES))
    f.add_argument("--grid", type=int, default=200)
    f.add_argument("--format", choices=["csv", "json"], default="csv")
    f.set_defaults(func=cmd_figures)

    ph = sub.add_parser("phase", parents=[common], help="phase distribution of a state")
    ph.add_argument("kind", choices=["canonical", "trig"])
    ph.add_argument("N", type=int)
    ph.add_argument("rho", nargs="+")
    ph.add_argument("--chi", type=float, default=0.0)
    ph.add_argument("--tsq", type=float, default=None, help="default: optimal per phase")
    ph.add_argument("--grid", type=int, default=phase.DEFAULT_GRID)
    ph.add_argument("--format", choices=["csv", "json"], default="csv")
    ph.set_defaults(func=cmd_phase)
    return p


def parse_args(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = parse_args(parser, argv)
    except SystemExit as exc:
        return exc.code
    except UsageError as exc:
        print(f"fockcascade: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fockcascade: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DesignVerificationFailed, InconsistentProbability, VerificationError) as exc:
        print(f"fockcascade: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (FockCascadeError, ValueError, OSError) as exc:
        print(f"fockcascade: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
