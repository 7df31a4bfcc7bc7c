"""Command-line front end: ``isp-qos {market,traffic,simulate,sweep}``.

Every output file starts with the resolved config as ``#`` comment lines and
is written through a temporary file that is renamed into place only after
all results have been computed.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config as cfg
from . import market, sim, traffic
from .errors import ConfigError, DomainError

log = logging.getLogger("isp_qos")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def atomic_write(outputs: dict[Path, str]) -> None:
    """Write each text to its path via temp file + rename."""
    staged = []
    try:
        for path, text in outputs.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def sibling(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}_{suffix}{out.suffix or '.csv'}")


def parse_window(raw: str | None) -> tuple[int, int] | None:
    if raw is None:
        return None
    try:
        a, b = (int(v) for v in raw.split(":"))
    except ValueError as exc:
        raise ConfigError(f"--window expects A:B, got {raw!r}") from exc
    if a < 0 or b < a:
        raise ConfigError(f"--window needs 0 <= A <= B, got {raw!r}")
    return a, b


def cmd_market(cp, args) -> dict[Path, str]:
    head = cfg.echo(cp)
    rows = market.validity_region(cfg.c_grid(cp))
    region = io.StringIO()
    region.write(head)
    market.write_region_csv(rows, region)

    c_total = cfg.isp_config(cp).total_bw_per_user
    split = io.StringIO()
    split.write(head)
    split.write("e,x,valid\n")
    for e, x, ok in market.split_sweep(c_total, cfg.e_grid(cp)):
        split.write(f"{e:.12g},{x:.12g},{int(ok)}\n")
    return {args.out: region.getvalue(), sibling(args.out, "split"): split.getvalue()}


def cmd_traffic(cp, args) -> dict[Path, str]:
    trace = traffic.generate(cfg.traffic_spec(cp))
    h_hat = traffic.estimate_hurst(trace.samples) if len(trace) >= 256 else float("nan")
    buf = io.StringIO()
    buf.write(cfg.echo(cp))
    buf.write(f"# summary mean={trace.samples.mean():.12g} hurst_hat={h_hat:.12g}\n")
    traffic.write_trace_csv(trace, buf)
    return {args.out: buf.getvalue()}


def cmd_simulate(cp, args) -> dict[Path, str]:
    window = parse_window(args.window)
    scenario = cfg.scenario(cp)
    records, summary = sim.run(scenario)
    head = cfg.echo(cp)

    ledger = io.StringIO()
    ledger.write(head)
    sim.write_ledger_csv(records, ledger)
    summ = io.StringIO()
    summ.write(head)
    sim.write_summary(summary, summ)
    out = {args.out: ledger.getvalue(), sibling(args.out, "summary"): summ.getvalue()}
    if window is not None:
        ext = io.StringIO()
        ext.write(head)
        ext.write(f"# window = {window[0]}:{window[1]}\n")
        sim.write_ledger_csv(records, ext, window)
        out[sibling(args.out, "window")] = ext.getvalue()
    return out


def cmd_sweep(cp, args) -> dict[Path, str]:
    betas, seeds, workers = cfg.sweep_params(cp)
    template = cfg.scenario(cp)
    table = sim.beta_sweep(template, betas, seeds, workers=workers)
    buf = io.StringIO()
    buf.write(cfg.echo(cp))
    buf.write("beta_b,mean_final_gamma\n")
    for b, g in table:
        buf.write(f"{b:.12g},{g:.12g}\n")
    return {args.out: buf.getvalue()}


COMMANDS = {
    "market": (cmd_market, "validity region of the market ratio and the bandwidth split"),
    "traffic": (cmd_traffic, "generate one burst traffic trace"),
    "simulate": (cmd_simulate, "run the timeslot simulation and write the ledger"),
    "sweep": (cmd_sweep, "final limiter exponent against the beta shape of the demand"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isp-qos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="INI-style key = value config")
        p.add_argument("--seed", type=int, help="override the scenario/traffic seed")
        p.add_argument("--out", type=Path, required=True)
        p.add_argument("--format", choices=["csv"], default="csv")
        if name == "simulate":
            p.add_argument("--window", help="also write slots A..B (inclusive), e.g. 3700:3800")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    func = COMMANDS[args.subcommand][0]
    try:
        cp = cfg.load(args.config, args.seed)
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            outputs = func(cp, args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (ArithmeticError, DomainError) as exc:
        log.error("numeric error: %s", exc)
        return EXIT_NUMERIC
    atomic_write(outputs)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
