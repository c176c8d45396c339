"""``landmark-sampling`` command line.

Exit codes: 0 success, 1 user error (bad flags, unreadable or malformed
input, budget refusal, failed verification), 2 internal error. Errors are a
single ``error: <kind>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterator, Sequence

from . import report
from .dasd import DEFAULT_ROW_BUDGET, RowBudgetExceeded, dasd_counts_from_landmark, dasd_table
from .hazard import DEFAULT_HORIZON, error_report, weighted_hazard, window_hazard, window_mass
from .ingest import UnknownEventCodeError, clean_panel, load_schema, parse_performance_file, write_performance_file
from .panel import EmptyPanelError, EventType, MonthDate, PanelValidationError, monthly_hazard_original, size_table
from .samplers import METHODS, ProgressiveWeightTable, SamplerConfig, as_fraction
from .synth import SynthConfig, synthetic_panel
from . import verify as verify_suites


class UserError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UserError("usage", f"{self.prog}: {message}")


def _month(text: str) -> MonthDate:
    try:
        return MonthDate.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM, got {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be >= 0")
    return v


def _rate(text: str) -> Fraction:
    try:
        p = as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rate such as 0.2 or 1/5, got {text!r}") from None
    if not 0 < p <= 1:
        raise argparse.ArgumentTypeError(f"rate must be in (0, 1], got {text}")
    return p


def _offset(text: str):
    if text == "random":
        return text
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"first offset must be an integer or 'random', got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("first offset must be >= 0")
    return v


@contextlib.contextmanager
def _open_out(path: str | None) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _load_panel(path: str):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return report.read_panel(fh)
    except OSError as exc:
        raise UserError("io", f"cannot read panel {path}: {exc.strerror}") from None


def _weight_table(args) -> ProgressiveWeightTable:
    table = ProgressiveWeightTable.default()
    if getattr(args, "weight_table", None):
        try:
            table = ProgressiveWeightTable.load(args.weight_table)
        except OSError as exc:
            raise UserError("io", f"cannot read weight table {args.weight_table}: {exc.strerror}") from None
        except (KeyError, TypeError, ValueError) as exc:
            raise UserError("format", f"bad weight table {args.weight_table}: {exc}") from None
    if getattr(args, "table_divisor", 1) > 1:
        table = table.scaled(args.table_divisor)
    return table


def _add_sampler_flags(p: argparse.ArgumentParser, multiple: bool) -> None:
    if multiple:
        p.add_argument("--methods", default=",".join(METHODS), help="comma-separated samplers to compare")
    else:
        p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--p", type=_rate, default=Fraction(1, 5), help="vertical/horizontal sampling rate")
    p.add_argument("--distance", type=_positive, default=6, help="uniform landmark spacing in months")
    p.add_argument("--first-offset", type=_offset, default=0, help="uniform first landmark offset, or 'random'")
    p.add_argument("--weight-table", help="backward weight table (JSON); default is the reference table")
    p.add_argument("--table-divisor", type=_positive, default=1, help="divide backward bracket bounds by this")
    p.add_argument("--threads", type=_positive, default=1)


def _config(args, method: str) -> SamplerConfig:
    return SamplerConfig(
        method,
        seed=args.seed,
        p=args.p,
        distance=args.distance,
        first_offset=args.first_offset,
        weight_table=_weight_table(args) if method == "backward" else None,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="landmark-sampling", description="Landmark sampling of survival panels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="clean a monthly performance file into a panel")
    p.add_argument("input")
    p.add_argument("--schema", default="freddie-mac", help="'freddie-mac' or an INI schema file")
    p.add_argument("--censor-date", type=_month, help="censor (and truncate) at this month")
    p.add_argument("--out", required=True, help="panel file to write ('-' for stdout)")
    p.add_argument("--report", help="write the cleaning report here (default stderr)")

    p = sub.add_parser("synth", help="generate a seeded synthetic panel")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--start", type=_month, default=MonthDate(2010, 1))
    p.add_argument("--months", type=_positive, default=48)
    p.add_argument("--individuals", type=_positive, default=2000)
    p.add_argument("--entry-months", type=_positive, default=1, help="spread individuals over this many entry cohorts")
    p.add_argument("--cohorts", help="explicit comma-separated cohort sizes (overrides --individuals)")
    p.add_argument("--hazard", action="append", default=[], metavar="EVENT=RATE", help="monthly event rate, repeatable")
    p.add_argument("--seasonality", type=float, default=0.3)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--format", choices=("panel", "performance"), default="panel")
    p.add_argument("--out", required=True)

    p = sub.add_parser("size-table", help="per-date counts and hazards of the unstacked panel")
    p.add_argument("--panel", required=True)
    p.add_argument("--out")

    p = sub.add_parser("dasd-counts", help="date-aligned super dataset counts")
    p.add_argument("--panel", required=True)
    p.add_argument("--landmark", type=_month, help="report t-multiplied counts for this landmark window instead")
    p.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON)
    p.add_argument("--out")

    p = sub.add_parser("sample", help="draw a stacked sample")
    p.add_argument("--panel", required=True)
    _add_sampler_flags(p, multiple=False)
    p.add_argument("--row-budget", type=_positive, default=DEFAULT_ROW_BUDGET)
    p.add_argument("--out", required=True)

    p = sub.add_parser("hazard", help="hazard table of a panel or a stacked sample")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--panel")
    src.add_argument("--sample")
    p.add_argument("--landmark", type=_month, help="restrict to the window starting here")
    p.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON)
    p.add_argument("--align", choices=("date", "offset"), default="date", help="panel only, without --landmark")
    p.add_argument("--out")

    p = sub.add_parser("compare", help="sampled vs original window hazards with MAE and RMSE")
    p.add_argument("--panel", required=True)
    p.add_argument("--landmark", type=_month, required=True)
    p.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON)
    _add_sampler_flags(p, multiple=True)
    p.add_argument("--out", help="wide table of window counts/weights")
    p.add_argument("--plot-data", help="long-format hazards, one row per date x event x source")
    p.add_argument("--errors", help="MAE/RMSE table (default stdout)")

    p = sub.add_parser("verify", help="run the built-in oracle checks")
    p.add_argument("--suite", choices=verify_suites.SUITES + ("all",), default="all")
    p.add_argument("--panel", help="panel for the census and dasd suites (default: built-in fixtures)")
    p.add_argument("--out")
    return parser


def cmd_ingest(args) -> None:
    try:
        schema = load_schema(args.schema)
    except OSError as exc:
        raise UserError("io", f"cannot read schema {args.schema}: {exc.strerror}") from None
    except (KeyError, ValueError) as exc:
        raise UserError("format", f"bad schema {args.schema}: {exc}") from None
    issues: list = []
    try:
        panel, rep = clean_panel(parse_performance_file(args.input, schema, issues), args.censor_date)
    except OSError as exc:
        raise UserError("io", f"cannot read {args.input}: {exc.strerror}") from None
    with _open_out(args.out) as out:
        report.write_panel(panel, out)
    text = rep.as_text() + f"malformed_rows={len(issues)}\n"
    text += "".join(f"malformed line {i.line}: {i.reason}\n" for i in issues)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)


def _parse_hazards(items: Sequence[str]) -> dict[EventType, float]:
    cfg = SynthConfig()
    hazards = dict(cfg.hazards)
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise UserError("usage", f"--hazard expects EVENT=RATE, got {item!r}")
        ev = EventType.parse(name)
        if ev is EventType.SURVIVAL:
            raise UserError("usage", "--hazard takes a terminal event type")
        rate = float(value)
        if not 0 <= rate < 1:
            raise UserError("usage", f"hazard rate must be in [0, 1), got {value}")
        hazards[ev] = rate
    return hazards


def cmd_synth(args) -> None:
    if args.cohorts:
        try:
            sizes = [int(x) for x in args.cohorts.split(",")]
        except ValueError:
            raise UserError("usage", "--cohorts expects comma-separated integers") from None
        if any(s < 0 for s in sizes):
            raise UserError("usage", "cohort sizes must be >= 0")
    else:
        base, extra = divmod(args.individuals, args.entry_months)
        sizes = [base + (1 if k < extra else 0) for k in range(args.entry_months)]
    cfg = SynthConfig(
        start=args.start,
        n_months=args.months,
        cohort_sizes=sizes,
        hazards=_parse_hazards(args.hazard),
        seasonality=args.seasonality,
        dropout=args.dropout,
        seed=args.seed,
    )
    panel = synthetic_panel(cfg)
    with _open_out(args.out) as out:
        if args.format == "panel":
            report.write_panel(panel, out)
        else:
            write_performance_file(panel, out)


def cmd_size_table(args) -> None:
    panel = _load_panel(args.panel)
    with _open_out(args.out) as out:
        report.write_size_table(size_table(panel), out)


def cmd_dasd_counts(args) -> None:
    panel = _load_panel(args.panel)
    with _open_out(args.out) as out:
        if args.landmark is None:
            report.write_dasd_counts(dasd_table(panel), out)
        else:
            report.write_landmark_counts(dasd_counts_from_landmark(panel, args.landmark, args.horizon), out)


def cmd_sample(args) -> None:
    panel = _load_panel(args.panel)
    sample = _config(args, args.method).sample(panel, threads=args.threads)
    if len(sample) > args.row_budget:
        raise RowBudgetExceeded(len(sample), args.row_budget)
    with _open_out(args.out) as out:
        report.write_sample(sample, out)


def cmd_hazard(args) -> None:
    if args.panel:
        panel = _load_panel(args.panel)
        if args.landmark is not None:
            hz = window_hazard(panel, args.landmark, args.horizon)
        else:
            hz = monthly_hazard_original(panel, align=args.align)
    else:
        try:
            with open(args.sample, encoding="utf-8", newline="") as fh:
                sample = report.read_sample(fh)
        except OSError as exc:
            raise UserError("io", f"cannot read sample {args.sample}: {exc.strerror}") from None
        hz = weighted_hazard(sample, args.landmark, args.horizon)
    if hz.notice:
        sys.stderr.write(f"notice: {hz.notice}\n")
    with _open_out(args.out) as out:
        report.write_hazard_table(hz, out)


def cmd_compare(args) -> None:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UserError("usage", f"unknown method(s) {','.join(bad) or '(none)'}; choose from {','.join(METHODS)}")
    panel = _load_panel(args.panel)
    L, H = args.landmark, args.horizon
    ref = window_hazard(panel, L, H)
    if len(ref) == 0:
        raise UserError("data", f"nothing at risk in the window starting {L}")
    st = size_table(panel)
    masses = {"original": window_mass(panel, L, H)}
    errors = {}
    for m in methods:
        sample = _config(args, m).sample(panel, threads=args.threads, size_table=st)
        masses[m] = window_mass(sample, L, H)
        errors[m] = error_report(window_hazard(sample, L, H), ref, L, H)
    dates = [L + k for k in range(H)]
    if args.out:
        with _open_out(args.out) as out:
            report.write_compare_wide(dates, masses, out)
    if args.plot_data:
        with _open_out(args.plot_data) as out:
            report.write_compare_long(dates, masses, out)
    with _open_out(args.errors) as out:
        report.write_errors(errors, out)


def cmd_verify(args) -> int:
    panel = _load_panel(args.panel) if args.panel else None
    suites = verify_suites.SUITES if args.suite == "all" else (args.suite,)
    ok = True
    with _open_out(args.out) as out:
        for suite in suites:
            for check in verify_suites.run(suite, panel):
                out.write(f"{'PASS' if check.passed else 'FAIL'} {suite} {check.name}: {check.detail}\n")
                ok &= check.passed
    if not ok:
        raise UserError("verify", "one or more checks failed")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "size-table": cmd_size_table,
    "dasd-counts": cmd_dasd_counts,
    "sample": cmd_sample,
    "hazard": cmd_hazard,
    "compare": cmd_compare,
    "verify": cmd_verify,
}


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
        return 0
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UserError as exc:
        kind, msg = exc.kind, str(exc)
    except RowBudgetExceeded as exc:
        kind, msg = "budget", str(exc)
    except (PanelValidationError, EmptyPanelError, report.FileFormatError, UnknownEventCodeError) as exc:
        kind, msg = "format", str(exc)
    except OSError as exc:
        kind, msg = "io", f"{exc.filename or ''} {exc.strerror or exc}".strip()
    except ValueError as exc:
        kind, msg = "value", str(exc)
    except Exception as exc:  # pragma: no cover - reported, not hidden
        sys.stderr.write(f"error: internal: {type(exc).__name__}: {_one_line(exc)}\n")
        return 2
    sys.stderr.write(f"error: {kind}: {_one_line(msg)}\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
