"""Command-line front end.

Usage::

    mrclc run --scenario inverted_pendulum --law composite --out out/
    mrclc compare --out out/            # all three laws side by side
    mrclc check --law composite         # run + Lyapunov monitor, exit 1 on failure

Overrides use dotted keys, either as ``--set controller.k_w=0`` or in a config
file of ``key = value`` lines passed with ``--config``. Flags beat file values,
which beat the scenario defaults.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .control import LAWS
from .errors import Diverged, MRCLCError, ParseError, UnknownKey
from .output import default_output_dir, emit_outputs
from .scenarios import build_scenario, coerce, default_params
from .simulation import metrics, run, theorem_check

VERBS = ("run", "compare", "check")


@dataclass
class CliConfig:
    verb: str
    scenario: str = "inverted_pendulum"
    law: str = "composite"
    outdir: str = field(default_factory=default_output_dir)
    overrides: dict = field(default_factory=dict)
    emit_plots: bool = False
    theorem_check: bool = False
    tail_start: float = 30.0
    jobs: int = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _parser():
    p = _Parser(prog="mrclc", description="Model-reference adaptive / composite learning simulations")
    sub = p.add_subparsers(dest="verb", parser_class=_Parser)
    for verb in VERBS:
        s = sub.add_parser(verb)
        s.add_argument("--scenario", default="inverted_pendulum")
        if verb != "compare":
            s.add_argument("--law", default="composite")
        s.add_argument("--out", dest="outdir", default=None)
        s.add_argument("--config", default=None, help="file of 'key = value' lines")
        s.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE")
        s.add_argument("--noise", type=float, default=None, help="measurement noise std on x")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--emit-plots", action="store_true")
        s.add_argument("--theorem-check", action="store_true")
        s.add_argument("--tail-start", type=float, default=30.0)
        if verb == "compare":
            s.add_argument("--jobs", type=int, default=1)
    return p


def read_config_file(path, defaults):
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            values[key] = coerce(key, value, defaults)
        except UnknownKey as exc:
            raise ParseError(f"{path}:{lineno}: {exc.args[0]}") from exc
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def parse_config(argv):
    """Turn an argv list into a CliConfig. Raises ParseError / UnknownScenario / UnknownKey."""
    args = _parser().parse_args(argv)
    if args.verb is None:
        raise ParseError(f"missing command; choose one of {', '.join(VERBS)}")
    law = getattr(args, "law", "composite")
    if law not in LAWS:
        raise ParseError(f"invalid law {law!r}; valid laws: {', '.join(LAWS)}")
    defaults = default_params(args.scenario)

    overrides = {}
    if args.config:
        overrides.update(read_config_file(args.config, defaults))
    for item in args.sets:
        if "=" not in item:
            raise ParseError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        try:
            overrides[key] = coerce(key, value, defaults)
        except ValueError as exc:
            raise ParseError(f"--set {item}: {exc}") from exc
    if args.noise is not None:
        overrides["scenario.noise"] = args.noise
    if args.seed is not None:
        overrides["scenario.seed"] = args.seed

    return CliConfig(
        verb=args.verb,
        scenario=args.scenario,
        law=law,
        outdir=args.outdir or default_output_dir(),
        overrides=overrides,
        emit_plots=args.emit_plots,
        theorem_check=args.theorem_check or args.verb == "check",
        tail_start=args.tail_start,
        jobs=getattr(args, "jobs", 1),
    )


def _execute(cfg, law, outdir):
    """Run one law; return (record, report, diverged)."""
    scenario = build_scenario(cfg.scenario, law=law, overrides=cfg.overrides)
    diverged = False
    try:
        record = run(scenario)
    except Diverged as exc:
        record, diverged = exc.record, True
    report = theorem_check(record) if cfg.theorem_check and len(record) > 1 else None
    emit_outputs(record, outdir, emit_plots=cfg.emit_plots, report=report, tail_start=cfg.tail_start)
    return record, report, diverged


def _status(report, diverged):
    return 1 if diverged or (report is not None and not report.passed) else 0


def _compare_worker(args):
    cfg, law = args
    record, report, diverged = _execute(cfg, law, Path(cfg.outdir) / law)
    m = metrics(record, min(cfg.tail_start, float(record.t[-1]) - 1e-9)) if len(record) > 1 else None
    return law, m, report.passed if report else None, diverged


def compare_table(results):
    lines = [f"{'law':<12}{'rmse_e1':>14}{'final|Wt|':>14}{'max|u|':>12}{'T_e':>8}{'theorem':>10}"]
    for law, m, passed, diverged in results:
        if m is None:
            lines.append(f"{law:<12}{'n/a':>14}")
            continue
        th = "-" if passed is None else ("PASS" if passed else "FAIL")
        if diverged:
            th = "DIVERGED"
        te = "-" if m["T_e"] is None else f"{m['T_e']:g}"
        lines.append(
            f"{law:<12}{m['tracking_rmse'][0]:>14.4e}{m['final_Wtilde_norm']:>14.4e}"
            f"{m['max_abs_u']:>12.4f}{te:>8}{th:>10}"
        )
    return "\n".join(lines)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        if cfg.verb == "compare":
            jobs = [(cfg, law) for law in LAWS]
            if cfg.jobs > 1:
                with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                    results = list(pool.map(_compare_worker, jobs))
            else:
                results = [_compare_worker(j) for j in jobs]
            table = compare_table(results)
            Path(cfg.outdir).mkdir(parents=True, exist_ok=True)
            (Path(cfg.outdir) / "compare.txt").write_text(table + "\n")
            print(table)
            return max(1 if d or p is False else 0 for _, _, p, d in results)
        record, report, diverged = _execute(cfg, cfg.law, cfg.outdir)
        print((Path(cfg.outdir) / "summary.txt").read_text(), end="")
        return _status(report, diverged)
    except MRCLCError as exc:
        print(f"mrclc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
