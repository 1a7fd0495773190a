"""Command-line front end: ``analyze``, ``simulate`` and ``sweep``."""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis
from .analysis import SCHEMES, ChannelModel, ThresholdError
from .lattice import KINDS
from .simulate import ExperimentConfig, SimulationReport, SweepError, sweep
from .sources import SourceModel

OUTPUT_DIR_ENV = "DIFFMAC_OUTPUT_DIR"

CSV_COLUMNS = (
    "scheme", "lattice", "sigma2", "rho", "P", "N", "blocks", "seed",
    "D_emp", "stderr", "D_cond", "wrap_rate", "rho_prime_hat",
    "D_analytic", "D_bound", "gap_bits",
)  # fmt: skip

_FLOAT_COLUMNS = {"sigma2", "rho", "P", "N", "D_emp", "stderr", "D_cond", "wrap_rate",
                  "rho_prime_hat", "D_analytic", "D_bound", "gap_bits"}  # fmt: skip
_INT_COLUMNS = {"blocks", "seed"}


def fmt_float(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


@dataclasses.dataclass(frozen=True)
class RunManifest:
    command: str
    configs: tuple
    output_path: Path
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValueError(f"output format must be csv or json, got {self.format!r}")
        if not self.configs:
            raise ValueError("manifest has no configs")


def config_from_dict(d: dict) -> ExperimentConfig:
    return ExperimentConfig(
        src=SourceModel(sigma2=float(d.get("sigma2", 1.0)), rho=float(d["rho"])),
        ch=ChannelModel(P=float(d["P"]), N=float(d["N"])),
        scheme=d["scheme"],
        lattice_kind=d.get("lattice") or None,
        blocks=int(d.get("blocks", 10_000)),
        seed=int(d.get("seed", 0)),
        n_override=None if d.get("n") in (None, "") else int(d["n"]),
        noiseless=bool(d.get("noiseless", False)),
        rho_prime_blocks=int(d.get("rho_prime_blocks", 100_000)),
    )


def load_manifest(path, command="simulate") -> tuple[RunManifest, list[str]]:
    """Read a JSON manifest; returns it plus messages for configs that failed validation."""
    raw = json.loads(Path(path).read_text())
    configs, errors = [], []
    for i, d in enumerate(raw.get("configs", [])):
        try:
            configs.append(config_from_dict(d))
        except (ValueError, KeyError) as exc:
            errors.append(f"config {i}: {exc}")
    out = raw.get("output") or default_output(command, raw.get("format", "csv"))
    manifest = RunManifest(command=raw.get("command", command), configs=tuple(configs),
                           output_path=Path(out), format=raw.get("format", "csv"))
    return manifest, errors


def record(cfg: ExperimentConfig, rep: SimulationReport) -> dict:
    return {
        "scheme": cfg.scheme,
        "lattice": cfg.lattice_kind or "",
        "sigma2": cfg.src.sigma2,
        "rho": cfg.src.rho,
        "P": cfg.ch.P,
        "N": cfg.ch.N,
        "blocks": cfg.blocks,
        "seed": cfg.seed,
        "D_emp": rep.empirical_distortion,
        "stderr": rep.stderr,
        "D_cond": rep.conditional_distortion,
        "wrap_rate": rep.wrap_rate,
        "rho_prime_hat": rep.rho_prime_hat,
        "D_analytic": rep.analytic_distortion,
        "D_bound": rep.analytic_bound,
        "gap_bits": rep.gap_bits,
    }


def parse_record(row: dict) -> tuple[ExperimentConfig, SimulationReport]:
    """Inverse of ``record`` for rows read back from CSV or JSON."""
    vals = {}
    for key in CSV_COLUMNS:
        v = row.get(key)
        if key in _FLOAT_COLUMNS:
            vals[key] = None if v in (None, "") else float(v)
        elif key in _INT_COLUMNS:
            vals[key] = int(v)
        else:
            vals[key] = v
    cfg = config_from_dict(vals)
    rp = vals["rho_prime_hat"]
    feasible = True
    if cfg.scheme == "lattice-common" and rp is not None:
        feasible = analysis.common_dither_feasible(cfg.src, cfg.ch, rp)
    rep = SimulationReport(
        empirical_distortion=vals["D_emp"],
        stderr=vals["stderr"],
        conditional_distortion=vals["D_cond"],
        wrap_rate=vals["wrap_rate"],
        analytic_distortion=vals["D_analytic"],
        analytic_bound=vals["D_bound"],
        gap_bits=vals["gap_bits"],
        samples=cfg.blocks * cfg.block_length(),
        rho_prime_hat=rp,
        feasible=feasible,
    )
    return cfg, rep


def render(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([fmt_float(r[k]) if k in _FLOAT_COLUMNS else r[k] for k in CSV_COLUMNS])
    return buf.getvalue()


def read_records(path) -> list[tuple[ExperimentConfig, SimulationReport]]:
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    return [parse_record(r) for r in rows]


def default_output(command: str, fmt: str) -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{command}.{fmt}"


def parse_axis(text: str) -> list[float]:
    """``"1,5,10"`` or ``"start:stop:count"`` (inclusive, evenly spaced)."""
    text = text.strip()
    if not text:
        raise ValueError("empty axis")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range axis must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"axis {text!r} is empty")
        return [float(v) for v in np.linspace(start, stop, count)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError(f"axis {text!r} is empty")
    return vals


def expand_grid(schemes, lattice, sigma2, rho, power, noise, **common) -> list[dict]:
    rows = []
    for scheme in schemes:
        for s2, r, p, n in itertools.product(sigma2, rho, power, noise):
            d = dict(common, scheme=scheme, sigma2=s2, rho=r, P=p, N=n)
            d["lattice"] = None if scheme == "uncoded" else lattice
            rows.append(d)
    return rows


def run_configs(configs, workers: int) -> tuple[list[dict], list[str]]:
    records, errors = [], []
    for cfg, res in zip(configs, sweep(configs, workers=workers)):
        if isinstance(res, SweepError):
            errors.append(f"{cfg.scheme} rho={cfg.src.rho:g} P={cfg.ch.P:g} N={cfg.ch.N:g}: {res.message}")
        else:
            records.append(record(cfg, res))
    return records, errors


def write_output(text: str, path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise click.ClickException(f"cannot write {path}: {exc}")


def finish(records, errors, path: Path, fmt: str):
    write_output(render(records, fmt), path)
    click.echo(f"wrote {len(records)} record(s) to {path}", err=True)
    for msg in errors:
        click.echo(f"error: {msg}", err=True)
    if errors:
        sys.exit(1)


def analyze_row(src: SourceModel, ch: ChannelModel, rho_primes) -> dict:
    row = {
        "sigma2": src.sigma2, "rho": src.rho, "P": ch.P, "N": ch.N,
        "D_bound": analysis.distortion_lower_bound(src, ch),
        "D_uncoded": analysis.uncoded_distortion(src, ch),
    }  # fmt: skip
    try:
        gamma = analysis.lattice_gamma(src, ch)
        row.update(
            D_lattice=analysis.lattice_distortion(src, ch),
            gap_bits=analysis.gap_bits(src, ch),
            gamma=gamma,
            alpha=analysis.lattice_alpha(ch),
            K=analysis.lattice_k(src, ch, gamma),
            crossover=analysis.scheme_crossover(src, ch),
        )
    except ThresholdError:
        row.update(D_lattice="infeasible", gap_bits="infeasible", gamma="infeasible",
                   alpha=analysis.lattice_alpha(ch), K="infeasible", crossover="uncoded")
    for rp in rho_primes:
        row[f"D_common@{rp:g}"] = analysis.common_dither_distortion(src, ch, rp)
        row[f"feasible_common@{rp:g}"] = analysis.common_dither_feasible(src, ch, rp)
    return row


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


@click.group()
def main():
    """Distributed transmission of a Gaussian source difference over a MAC."""


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()] if text else []


@main.command("analyze")
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--rho", type=float, required=True)
@click.option("--power", "P", type=float, required=True)
@click.option("--noise", "N", type=float, required=True)
@click.option("--rho-prime", "rho_prime", default="", help="comma-separated rho' values for the common-dither column")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def analyze_cmd(sigma2, rho, P, N, rho_prime, fmt):
    """Print every closed-form quantity for one parameter point."""
    try:
        src = SourceModel(sigma2=sigma2, rho=rho)
        ch = ChannelModel(P=P, N=N)
        row = analyze_row(src, ch, _floats(rho_prime))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    if fmt == "json":
        click.echo(json.dumps(row))
    else:
        click.echo(",".join(row))
        click.echo(",".join(_cell(v) for v in row.values()))


def _output_path(output, command, fmt):
    return Path(output) if output else default_output(command, fmt)


@main.command("simulate")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--scheme", type=click.Choice(SCHEMES), default=None)
@click.option("--lattice", type=click.Choice(KINDS), default=None)
@click.option("--sigma2", type=float, default=1.0)
@click.option("--rho", type=float, default=None)
@click.option("--power", "P", type=float, default=None)
@click.option("--noise", "N", type=float, default=None)
@click.option("--blocks", type=int, default=10_000)
@click.option("--seed", type=int, default=0)
@click.option("--n", "n", type=int, default=None, help="block length (uncoded) or cubic-zn dimension")
@click.option("--no-noise", "noiseless", is_flag=True, help="zero the channel noise (chain debugging)")
@click.option("--rho-prime-blocks", type=int, default=100_000)
@click.option("--output", "-o", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None)
@click.option("--workers", type=int, default=1)
def simulate_cmd(manifest, scheme, lattice, sigma2, rho, P, N, blocks, seed, n, noiseless,
                 rho_prime_blocks, output, fmt, workers):
    """Run one config from flags, or every config of a JSON manifest."""
    try:
        if manifest:
            man, errors = load_manifest(manifest)
            fmt = fmt or man.format
            path = Path(output) if output else man.output_path
            configs = list(man.configs)
        else:
            if scheme is None or rho is None or P is None or N is None:
                raise ValueError("simulate needs --manifest or --scheme, --rho, --power and --noise")
            fmt = fmt or "csv"
            configs = [config_from_dict(dict(
                scheme=scheme, lattice=lattice, sigma2=sigma2, rho=rho, P=P, N=N, blocks=blocks,
                seed=seed, n=n, noiseless=noiseless, rho_prime_blocks=rho_prime_blocks))]
            errors = []
            path = _output_path(output, "simulate", fmt)
    except (ValueError, KeyError) as exc:
        raise click.ClickException(str(exc))
    records, run_errors = run_configs(configs, workers)
    finish(records, errors + run_errors, path, fmt)


@main.command("sweep")
@click.option("--scheme", "schemes", type=click.Choice(SCHEMES), multiple=True)
@click.option("--lattice", type=click.Choice(KINDS), default="e8", show_default=True)
@click.option("--sigma2", default="1", help="axis: a,b,c or start:stop:count")
@click.option("--rho", required=True)
@click.option("--power", "P", required=True)
@click.option("--noise", "N", default="1")
@click.option("--blocks", type=int, default=10_000)
@click.option("--seed", type=int, default=0)
@click.option("--n", "n", type=int, default=None)
@click.option("--no-noise", "noiseless", is_flag=True)
@click.option("--rho-prime-blocks", type=int, default=100_000)
@click.option("--output", "-o", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--workers", type=int, default=1)
def sweep_cmd(schemes, lattice, sigma2, rho, P, N, blocks, seed, n, noiseless, rho_prime_blocks,
              output, fmt, workers):
    """Cartesian-product sweep over sigma2, rho, P and N; one CSV row per config."""
    try:
        axes = [parse_axis(a) for a in (sigma2, rho, P, N)]
    except ValueError as exc:
        raise click.ClickException(str(exc))
    rows = expand_grid(schemes or SCHEMES, lattice, *axes, blocks=blocks, seed=seed, n=n,
                       noiseless=noiseless, rho_prime_blocks=rho_prime_blocks)
    configs, errors = [], []
    for d in rows:
        try:
            configs.append(config_from_dict(d))
        except ValueError as exc:
            errors.append(f"{d['scheme']} rho={d['rho']:g} P={d['P']:g} N={d['N']:g}: {exc}")
    records, run_errors = run_configs(configs, workers) if configs else ([], [])
    finish(records, errors + run_errors, _output_path(output, "sweep", fmt), fmt)


if __name__ == "__main__":
    main()
