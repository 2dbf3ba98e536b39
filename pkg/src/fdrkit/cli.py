"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 every grid point needed a
reject-all threshold. Diagnostics go to stderr; results go to files under
``--out``.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from . import report, svgplot
from .fdr import DomainError, _unit, evaluate_grid
from .identification import (EmptyCohort, closed_set_discrepancy, dir_rate,
                             load_trials, open_set_discrepancy, rank_n_rate)
from .ingest import IngestError, load_scores, load_split, write_split
from .rates import EmptyCell, det_curve
from .scores import DataWarning, OperatingPointGrid, Polarity
from .synthetic import InvalidSpec, UnknownPreset, generate, load_spec, preset

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

FORMATS = ("csv", "json", "svg")
DEFAULT_GRID = "1,2,3,4,5"


class UsageError(ValueError):
    """Invalid combination of arguments or config values."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one run (flags > config file > defaults)."""

    dev: tuple[str, ...] = ()
    test: tuple[str, ...] = ()
    grid: tuple[OperatingPointGrid, ...] = (OperatingPointGrid.parse(DEFAULT_GRID),)
    alpha: float = 0.5
    epsilon: float | None = None
    polarity: Polarity = Polarity.SIMILARITY
    out: Path = Path("fdrkit-out")
    formats: frozenset[str] = frozenset({"csv", "json"})
    label: tuple[str, ...] = ()
    seed: int = 42

    def __post_init__(self) -> None:
        _unit("alpha", self.alpha)
        if self.epsilon is not None:
            _unit("epsilon", self.epsilon)
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise UsageError(f"unknown format(s) {sorted(bad)}; choose from {FORMATS}")


def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    known = {f.name for f in fields(RunConfig)} | {"format"}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(name, flag_value):
        if flag_value not in (None, []):
            return flag_value
        if name in file_values:
            return file_values[name]
        return None

    def as_list(v):
        if v is None:
            return []
        return list(v) if isinstance(v, list) else _split_list(v)

    kwargs = {}
    dev = as_list(pick("dev", getattr(args, "dev", None)))
    test = as_list(pick("test", getattr(args, "test", None)))
    kwargs["dev"], kwargs["test"] = tuple(dev), tuple(test)
    grid = pick("grid", getattr(args, "grid", None))
    if grid is not None:
        grids = grid if isinstance(grid, list) else [grid]
        try:
            kwargs["grid"] = tuple(OperatingPointGrid.parse(g) for g in grids)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for name, conv in (("alpha", float), ("epsilon", float), ("seed", int)):
        v = pick(name, getattr(args, name, None))
        if v is not None:
            try:
                kwargs[name] = conv(v)
            except ValueError:
                raise UsageError(f"{name} must be a number, got {v!r}") from None
    pol = pick("polarity", getattr(args, "polarity", None))
    if pol is not None:
        try:
            kwargs["polarity"] = Polarity(str(pol).lower())
        except ValueError:
            raise UsageError(f"polarity must be 'similarity' or 'distance', got {pol!r}") from None
    out = pick("out", getattr(args, "out", None))
    if out is not None:
        kwargs["out"] = Path(out)
    fmt = pick("format", getattr(args, "format", None)) or file_values.get("formats")
    if fmt is not None:
        kwargs["formats"] = frozenset(_split_list(fmt))
    label = pick("label", getattr(args, "label", None))
    kwargs["label"] = tuple(as_list(label))
    return RunConfig(**kwargs)


def _diag(msg: str) -> None:
    print(f"fdrkit: {msg}", file=sys.stderr)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _single_grid(cfg: RunConfig) -> OperatingPointGrid:
    if len(cfg.grid) != 1:
        raise UsageError("this command takes a single --grid")
    return cfg.grid[0]


def _load_system(cfg: RunConfig, i: int):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DataWarning)
        data = load_split(cfg.dev[i], cfg.test[i], polarity=cfg.polarity)
    for w in caught:
        _diag(f"warning: {w.message}")
    return data


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if len(cfg.dev) != 1 or len(cfg.test) != 1:
        raise UsageError("evaluate needs exactly one --dev and one --test")
    grid = _single_grid(cfg)
    data = _load_system(cfg, 0)
    ev = evaluate_grid(data, grid)
    for d in ev.diagnostics:
        _diag(d)
    label = cfg.label[0] if cfg.label else None
    doc = report.evaluation_report(ev, cfg.alpha, cfg.epsilon, label)
    _write(cfg.out / "report.txt", report.render_table(doc))
    if "json" in cfg.formats:
        _write(cfg.out / "report.json", report.dumps_json(doc))
    curve = ev.curve(cfg.alpha)
    name = label or "system"
    if "csv" in cfg.formats:
        _write(cfg.out / "fdr_curve.csv", report.curves_csv({name: curve}))
    if "svg" in cfg.formats:
        _write(cfg.out / "fdr_curve.svg", svgplot.fdr_chart({name: curve}))
    if ev.all_degenerate:
        _diag("every grid point needed a reject-all threshold; the dev set is too small for this grid")
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_fdr_curve(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    n = len(cfg.dev)
    if n == 0 or n != len(cfg.test):
        raise UsageError("fdr-curve needs matching numbers of --dev and --test (one pair per system)")
    if cfg.label and len(cfg.label) != n:
        raise UsageError(f"got {len(cfg.label)} --label values for {n} systems")
    if len(cfg.grid) not in (1, n):
        raise UsageError(f"got {len(cfg.grid)} --grid values for {n} systems")
    if len(set(g.exponents for g in cfg.grid)) > 1:
        raise UsageError("overlaid systems must share one grid; got "
                         + " vs ".join(",".join(f"{x:g}" for x in g) for g in cfg.grid))
    grid = cfg.grid[0]
    labels = list(cfg.label) or [f"system{i + 1}" for i in range(n)]
    if len(set(labels)) != n:
        raise UsageError("system labels must be unique")
    curves, degenerate = {}, True
    for i, name in enumerate(labels):
        ev = evaluate_grid(_load_system(cfg, i), grid)
        for d in ev.diagnostics:
            _diag(f"{name}: {d}")
        degenerate = degenerate and ev.all_degenerate
        curves[name] = ev.curve(cfg.alpha)
    _write(cfg.out / "fdr_curves.csv", report.curves_csv(curves))
    _write(cfg.out / "aufdr.csv", report.aufdr_csv(curves))
    if "svg" in cfg.formats:
        _write(cfg.out / "fdr_curves.svg", svgplot.fdr_chart(curves))
    return EXIT_DEGENERATE if degenerate else EXIT_OK


def cmd_det(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if len(cfg.test) != 1:
        raise UsageError("det needs exactly one --test")
    scores = load_scores(cfg.test[0], polarity=cfg.polarity)
    wanted = _split_list(args.demographics) if args.demographics else list(scores.labels)
    series, skipped = {}, []
    for d in wanted:
        try:
            series[d] = det_curve(scores, d)
        except EmptyCell as exc:
            skipped.append(d)
            _diag(f"skipped {d!r}: {exc}")
    if not series:
        _diag("no demographic produced a DET curve")
        return EXIT_INPUT
    _write(cfg.out / "det.csv", report.det_csv(series))
    if "svg" in cfg.formats:
        _write(cfg.out / "det.svg", svgplot.det_chart(series, title=cfg.label[0] if cfg.label else "DET"))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if args.spec:
        spec = load_spec(args.spec)
        if args.seed is not None:
            spec = spec.with_seed(cfg.seed)
    elif args.preset:
        spec = preset(args.preset, cfg.seed, args.scale)
    else:
        raise UsageError("synth needs a preset name or --spec FILE")
    data = generate(spec)
    dev = Path(cfg.dev[0]) if cfg.dev else cfg.out / "dev.csv"
    test = Path(cfg.test[0]) if cfg.test else cfg.out / "test.csv"
    write_split(data, dev, test)
    return EXIT_OK


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in _split_list(text)]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated list of numbers, got {text!r}") from None


def cmd_identify(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    gallery = load_trials(args.trials, cfg.polarity)
    ranks = [int(r) for r in _parse_floats(args.rank, "--rank")]
    taus = _parse_floats(args.tau, "--tau") if args.tau else []
    demos = gallery.demographics
    doc: dict = {"alpha": cfg.alpha, "gallery_size": gallery.gallery_size, "rank": [], "open_set": []}
    lines = [f"gallery size {gallery.gallery_size}, {len(gallery.trials)} probes"]
    for n in ranks:
        rates = {}
        for d in demos:
            try:
                rates[d] = rank_n_rate(gallery, n, d)
            except EmptyCohort:
                pass
        c = closed_set_discrepancy(gallery, n) if rates else None
        doc["rank"].append({"n": n, "rates": rates, "discrepancy": c})
        cells = "  ".join(f"{d}={report.fmt_rate(v)}" for d, v in rates.items())
        lines.append(f"rank-{n}: {cells}  C={report.fmt_rate(c)}")
    status = EXIT_OK
    for tau in taus:
        try:
            res = open_set_discrepancy(gallery, tau, cfg.alpha)
        except EmptyCohort as exc:
            _diag(f"tau={tau:g}: open-set report skipped: {exc}")
            dirs = {d: dir_rate(gallery, tau, d) for d in demos if gallery.cohort(d, True)}
            doc["open_set"].append({"tau": tau, "dir": dirs, "far": None, "error": str(exc)})
            lines.append(f"tau={tau:g}: DIR " + "  ".join(f"{d}={report.fmt_rate(v)}" for d, v in dirs.items())
                         + "  FAR unavailable")
            continue
        entry = {"tau": tau, "dir": res.dir, "far": res.far, "dir_gap": res.dir_gap, "far_gap": res.far_gap}
        if args.mode in ("literal", "both"):
            entry["fdr_prime"] = res.literal
        if args.mode in ("complement", "both"):
            entry["fdr_prime_complement"] = res.complement
        doc["open_set"].append(entry)
        parts = [f"tau={tau:g}:",
                 "DIR " + " ".join(f"{d}={report.fmt_rate(v)}" for d, v in res.dir.items()),
                 "FAR " + " ".join(f"{d}={report.fmt_rate(v)}" for d, v in res.far.items())]
        if "fdr_prime" in entry:
            parts.append(f"FDR'={report.fmt_fdr(res.literal)}")
        if "fdr_prime_complement" in entry:
            parts.append(f"1-FDR'={report.fmt_fdr(res.complement)}")
        lines.append("  ".join(parts))
    _write(cfg.out / "identify.txt", "\n".join(lines) + "\n")
    if "json" in cfg.formats:
        _write(cfg.out / "identify.json", json.dumps(doc, indent=2) + "\n")
    return status


def _common(p: argparse.ArgumentParser, *, data: bool = True) -> None:
    if data:
        p.add_argument("--dev", action="append", help="development score CSV (repeat per system)")
        p.add_argument("--test", action="append", help="test score CSV (repeat per system)")
        p.add_argument("--grid", action="append", help=f"FMR exponents, e.g. {DEFAULT_GRID}")
        p.add_argument("--epsilon", help="fairness tolerance; adds a verdict row")
    p.add_argument("--alpha", help="weight of the FMR gap (default 0.5)")
    p.add_argument("--polarity", help="similarity (default) or distance")
    p.add_argument("--out", help="output directory (default fdrkit-out)")
    p.add_argument("--format", help=f"comma list from {','.join(FORMATS)} (default csv,json)")
    p.add_argument("--label", action="append", help="system label (repeat per system)")
    p.add_argument("--config", help="flat key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdrkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="rate tables, FDR row and AUFDR for one system")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fdr-curve", help="FDR curves of one or more systems on a shared grid")
    _common(p)
    p.set_defaults(func=cmd_fdr_curve)

    p = sub.add_parser("det", help="per-demographic DET curves")
    _common(p)
    p.add_argument("--demographics", help="comma list (default: all)")
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("synth", help="write synthetic dev/test score files")
    p.add_argument("preset", nargs="?", help="fair3 or unfair3")
    p.add_argument("--spec", help="JSON generator spec instead of a preset")
    p.add_argument("--seed", help="RNG seed (default 42)")
    p.add_argument("--scale", type=float, default=1.0, help="multiply preset sample counts")
    p.add_argument("--dev", action="append", help="dev output path (default OUT/dev.csv)")
    p.add_argument("--test", action="append", help="test output path (default OUT/test.csv)")
    p.add_argument("--out", help="output directory (default fdrkit-out)")
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("identify", help="closed- and open-set identification discrepancies")
    _common(p, data=False)
    p.add_argument("--trials", required=True, help="identification trial CSV")
    p.add_argument("--rank", default="1", help="comma list of ranks n (default 1)")
    p.add_argument("--tau", help="comma list of open-set thresholds")
    p.add_argument("--mode", choices=("literal", "complement", "both"), default="both",
                   help="FDR' as the weighted gap, its complement, or both")
    p.set_defaults(func=cmd_identify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, UsageError, DomainError, InvalidSpec, EmptyCohort, EmptyCell,
            ValueError, OSError) as exc:
        _diag(f"error: {type(exc).__name__}: {exc}")
        return EXIT_INPUT
    except UnknownPreset as exc:
        _diag(f"error: UnknownPreset: {exc.args[0]}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
