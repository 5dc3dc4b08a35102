"""Command-line front end.

Every command is deterministic given its flags and seed, writes plain
text or CSV, and exits 0 on success or 1 with a single `error: ...`
line on stderr otherwise.  Channels are given either as the shorthand
`bsc:p`, `bec:p`, `awgn:snr_db` or as a path to a channel file.
"""

from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from .channels import (DiscreteSymmetricChannel, make_channel, parse_channel,
                       read_channel)
from .concat import (ConcatSpec, concat_decode, concat_encode,
                     column_error_table, concat_fer_bound, design_report,
                     dp_allocate, read_assignment, write_assignment)
from .construct import (analyze, choose_frozen, de_bit_densities,
                        de_bit_errors, fer_upper_bound, write_profile)
from .density import LlrGrid
from .polar import (PolarCodeSpec, read_bits, read_frozen_set, sc_decode,
                    write_bits, write_frozen_set)
from .polar import encode as polar_encode
from .shortcodes import load_code_table
from .sim import ConcatCodec, PolarCodec, run_mc, sweep, write_sweep_csv

__all__ = ["main", "RunConfig"]


@dataclass
class RunConfig:
    """Validated per-invocation settings shared by the subcommands."""

    channel: DiscreteSymmetricChannel | None = None
    grid: LlrGrid = field(default_factory=LlrGrid.default)
    seed: int = 1
    box_mode: str = "fast"


def _fail(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(1)


def _load_channel(text: str) -> DiscreteSymmetricChannel:
    if ":" in text:
        return make_channel(parse_channel(text))
    if os.path.exists(text):
        return read_channel(text)
    raise ValueError(f"channel {text!r} is neither kind:value nor a file")


def _make_grid(a: float, q: int) -> LlrGrid:
    if a <= 0 or q < 1:
        raise ValueError("grid needs A > 0 and Q >= 1")
    return LlrGrid(q, a / q)


def _wrap(fn):
    """Uniform one-line error reporting for command bodies."""
    def body(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (ValueError, KeyError, OSError, RuntimeError) as exc:
            _fail(str(exc))
    body.__name__ = fn.__name__
    return body


grid_options = [
    click.option("--grid-a", type=float, default=60.0, show_default=True,
                 help="LLR grid half-range A."),
    click.option("--grid-q", type=int, default=8192, show_default=True,
                 help="Cells per side Q (spacing A/Q)."),
]


def _with(opts):
    def deco(fn):
        for o in reversed(opts):
            fn = o(fn)
        return fn
    return deco


@click.group()
def main():
    """Polar and concatenated-polar code toolkit."""


@main.command()
@click.option("--channel", "channel_text", required=True,
              help="bsc:p, bec:p, awgn:snr_db, or a channel file.")
@click.option("--n", "n_levels", type=int, required=True,
              help="Polar levels; N = 2^n.")
@click.option("--rate", type=float, default=None,
              help="Code rate K/N (exclusive with --k).")
@click.option("--k", "k_info", type=int, default=None, help="Information bits.")
@_with(grid_options)
@click.option("--box-mode", type=click.Choice(["fast", "exact"]),
              default="fast", show_default=True)
@click.option("--frozen-out", type=click.Path(), default=None,
              help="Frozen-set file to write.")
@click.option("--profile-out", type=click.Path(), default=None,
              help="Per-bit error profile dump.")
@_wrap
def construct(channel_text, n_levels, rate, k_info, grid_a, grid_q,
              box_mode, frozen_out, profile_out):
    """Design a polar code for a channel; print its FER bound."""
    if (rate is None) == (k_info is None):
        raise ValueError("give exactly one of --rate or --k")
    cfg = RunConfig(channel=_load_channel(channel_text),
                    grid=_make_grid(grid_a, grid_q), box_mode=box_mode)
    N = 1 << n_levels
    K = k_info if k_info is not None else round(rate * N)
    if not 0 <= K <= N:
        raise ValueError(f"K={K} outside [0, {N}]")
    profile = de_bit_errors(cfg.channel.initial_density(cfg.grid), n_levels,
                            cfg.box_mode)
    frozen = choose_frozen(profile, K)
    spec = PolarCodeSpec(n_levels, frozen)
    bound = fer_upper_bound(profile, frozen)
    if frozen_out:
        write_frozen_set(spec, frozen_out)
    if profile_out:
        write_profile(profile, profile_out)
    click.echo(f"N={N} K={K} channel={cfg.channel.name} "
               f"fer_bound={bound:.6e}")


@main.command("construct-concat")
@click.option("--channel", "channel_text", required=True)
@click.option("--n", "n_levels", type=int, required=True,
              help="Inner polar levels; columns N = 2^n.")
@click.option("--k-target", type=int, required=True,
              help="Total information bits.")
@click.option("--table", "table_path", type=click.Path(exists=True),
              default=None, help="Code table file (default: shipped).")
@_with(grid_options)
@click.option("--box-mode", type=click.Choice(["fast", "exact"]),
              default="fast", show_default=True)
@click.option("--assignment-out", type=click.Path(), default=None)
@click.option("--report-out", type=click.Path(), default=None)
@_wrap
def construct_concat(channel_text, n_levels, k_target, table_path,
                     grid_a, grid_q, box_mode, assignment_out, report_out):
    """Allocate short codes over the columns for a target rate."""
    cfg = RunConfig(channel=_load_channel(channel_text),
                    grid=_make_grid(grid_a, grid_q), box_mode=box_mode)
    table = load_code_table(table_path)
    dens = de_bit_densities(cfg.channel.initial_density(cfg.grid), n_levels,
                            cfg.box_mode)
    E = column_error_table(dens, table)
    assignment, _ = dp_allocate(E, k_target)
    if assignment is None:
        _fail(f"K_target={k_target} infeasible for this table")
    spec = ConcatSpec(table, n_levels, assignment)
    if assignment_out:
        write_assignment(assignment, assignment_out)
    report = design_report(spec, E, k_target)
    if report_out:
        with open(report_out, "w") as fh:
            fh.write(report)
    bound = concat_fer_bound(E, assignment)
    click.echo(f"M={spec.M} N={spec.N} K={spec.K} rate={spec.rate:.6g} "
               f"fer_bound={bound:.6e}")


def _load_codec(frozen_path, assignment_path, table_path):
    if (frozen_path is None) == (assignment_path is None):
        raise ValueError("give exactly one of --frozen or --assignment")
    if frozen_path is not None:
        return PolarCodec(read_frozen_set(frozen_path))
    table = load_code_table(table_path)
    assignment = read_assignment(assignment_path, table)
    n = int(assignment.size - 1).bit_length()
    if 1 << n != assignment.size:
        raise ValueError("assignment length must be a power of two")
    return ConcatCodec(ConcatSpec(table, n, assignment))


@main.command()
@click.option("--channel", "channel_text", required=True,
              help="Base channel; sweep values override the parameter.")
@click.option("--sweep", "sweep_text", default=None,
              help="Comma-separated parameter values.")
@click.option("--frozen", "frozen_path", type=click.Path(exists=True),
              default=None, help="Polar frozen-set file.")
@click.option("--assignment", "assignment_path", type=click.Path(exists=True),
              default=None, help="Concatenated-code assignment file.")
@click.option("--table", "table_path", type=click.Path(exists=True),
              default=None)
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--shards", type=int, default=1, show_default=True)
@click.option("--force-random", is_flag=True,
              help="Transmit random messages instead of the zero word.")
@_with(grid_options)
@click.option("--box-mode", type=click.Choice(["fast", "exact"]),
              default="fast", show_default=True)
@click.option("--csv-out", type=click.Path(), default=None,
              help="CSV path (default: stdout).")
@_wrap
def simulate(channel_text, sweep_text, frozen_path, assignment_path,
             table_path, trials, seed, shards, force_random, grid_a,
             grid_q, box_mode, csv_out):
    """Monte-Carlo FER with the analytical bound alongside."""
    param = parse_channel(channel_text) if ":" in channel_text else None
    if param is None:
        raise ValueError("simulate needs a kind:value channel")
    grid = _make_grid(grid_a, grid_q)
    codec = _load_codec(frozen_path, assignment_path, table_path)
    values = ([float(v) for v in sweep_text.split(",")]
              if sweep_text else [param.value])
    rows = sweep(codec, param.kind, values, trials, seed, grid,
                 shards=shards, box_mode=box_mode, force_random=force_random)
    if csv_out:
        write_sweep_csv(rows, csv_out)
    else:
        write_sweep_csv(rows, sys.stdout)


@main.command("analyze")
@click.option("--channel", "channel_text", required=True)
@click.option("--frozen", "frozen_path", type=click.Path(exists=True),
              default=None)
@click.option("--assignment", "assignment_path", type=click.Path(exists=True),
              default=None)
@click.option("--table", "table_path", type=click.Path(exists=True),
              default=None)
@_with(grid_options)
@click.option("--box-mode", type=click.Choice(["fast", "exact"]),
              default="fast", show_default=True)
@_wrap
def analyze_cmd(channel_text, frozen_path, assignment_path, table_path,
                grid_a, grid_q, box_mode):
    """Analytical FER bound of an existing code on a channel."""
    channel = _load_channel(channel_text)
    grid = _make_grid(grid_a, grid_q)
    codec = _load_codec(frozen_path, assignment_path, table_path)
    bound = codec.de_bound(channel, grid, box_mode)
    click.echo(f"channel={channel.name} fer_bound={bound:.6e}")


@main.command()
@click.option("--frozen", "frozen_path", type=click.Path(exists=True),
              default=None)
@click.option("--assignment", "assignment_path", type=click.Path(exists=True),
              default=None)
@click.option("--table", "table_path", type=click.Path(exists=True),
              default=None)
@click.option("--in", "info_path", type=click.Path(exists=True),
              required=True, help="Information bits, whitespace separated.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@_wrap
def encode(frozen_path, assignment_path, table_path, info_path, out_path):
    """Encode information bits to a codeword file."""
    codec = _load_codec(frozen_path, assignment_path, table_path)
    info = read_bits(info_path)
    if isinstance(codec, PolarCodec):
        cw = polar_encode(info, codec.spec)
    else:
        cw = concat_encode(info, codec.spec).reshape(-1)
    write_bits(cw, out_path)
    click.echo(f"wrote {cw.size} bits")


@main.command()
@click.option("--frozen", "frozen_path", type=click.Path(exists=True),
              default=None)
@click.option("--assignment", "assignment_path", type=click.Path(exists=True),
              default=None)
@click.option("--table", "table_path", type=click.Path(exists=True),
              default=None)
@click.option("--in", "llr_path", type=click.Path(exists=True),
              required=True, help="Channel LLRs, whitespace separated.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@_wrap
def decode(frozen_path, assignment_path, table_path, llr_path, out_path):
    """Decode channel LLRs; writes the decided message-side bits."""
    codec = _load_codec(frozen_path, assignment_path, table_path)
    with open(llr_path) as fh:
        lam = np.array([float(v) for v in fh.read().split()])
    if isinstance(codec, PolarCodec):
        spec = codec.spec
        if lam.size != spec.N:
            raise ValueError(f"expected {spec.N} LLRs, got {lam.size}")
        res = sc_decode(lam, spec)
        write_bits(res.u, out_path)
        click.echo(f"wrote {res.u.size} bits")
    else:
        spec = codec.spec
        if lam.size != spec.M * spec.N:
            raise ValueError(
                f"expected {spec.M}x{spec.N} LLRs, got {lam.size}")
        vhat = concat_decode(lam.reshape(spec.M, spec.N), spec)
        write_bits(vhat.reshape(-1), out_path)
        click.echo(f"wrote {vhat.size} bits")


@main.command("verify-codes")
@click.argument("table_path", type=click.Path(exists=True), required=False)
@_wrap
def verify_codes(table_path):
    """Recompute every table entry's (d, m) and compare with its header."""
    table = load_code_table(table_path, verify=True)
    for code in sorted(table.codes, key=lambda c: c.K):
        d = "inf" if math.isinf(code.d) else int(code.d)
        click.echo(f"K={code.K:2d} d={d} m={code.m}: ok")
    click.echo(f"{len(table)}/{len(table)} pass")


if __name__ == "__main__":
    main()
