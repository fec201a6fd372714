"""
Command-line entry point.

    qwstat --config run.yaml --out results/
    qwstat --sweep runs.yaml --out results/ --tol residual=1e-11

Each run writes ``summary.json`` plus per-site CSV (or JSON) series into its
output directory. Exit codes: 0 all checks passed, 1 a verification check
exceeded its tolerance, 2 configuration error, 3 domain error (for example a
singular coin entry).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .coin import CoinSequence, CPhiParams, build_coin, detect_period
from .config import ConfigError, RandomCoins, RunConfig, parse_config
from .errors import DomainError
from .evolve import EvolutionOperator, dense_cycle_operator, step
from .io import write_field, write_json, write_measure_series, write_table
from .rw import HoppingSequence, dichotomy_table, rw_step, uniform_stationarity_witness
from .state import Measure, SpinorField, gamma_measure, uniformity_defect
from .topology import Cycle, Line
from .transfer import build_eigenstate, cycle_product, eigen_residual, normalize_lambda, plus_matrices

log = logging.getLogger("qwstat")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3


class _Checks:
    def __init__(self) -> None:
        self.items: list[dict[str, Any]] = []

    def add(self, name: str, value: float, tol: float) -> None:
        self.items.append({"name": name, "value": float(value), "tol": float(tol), "pass": bool(value <= tol)})

    def expect(self, name: str, ok: bool) -> None:
        self.items.append({"name": name, "pass": bool(ok)})

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.items)


def _coins(cfg: RunConfig) -> CoinSequence:
    top = cfg.topology
    if isinstance(cfg.model, CPhiParams):
        return CoinSequence.cphi(cfg.model, top)
    if isinstance(cfg.model, RandomCoins):
        if cfg.command == "period":
            scan = cfg.scan_width or 4 * cfg.max_period
            top = Line(scan + cfg.max_period)
        rng = np.random.default_rng(cfg.model.seed)
        omegas = rng.uniform(0.0, 2.0 * math.pi, top.n_sites)
        table = np.stack([build_coin(cfg.model.theta, w).matrix for w in omegas])
        return CoinSequence.explicit(table, top, unitary_tol=cfg.tolerances["unitary"])
    return CoinSequence.explicit(
        cfg.model, top, periodic=cfg.periodic, unitary_tol=cfg.tolerances["unitary"]
    )


def _lambda(cfg: RunConfig) -> complex:
    if cfg.lam is not None:
        return normalize_lambda(cfg.lam)
    phi = cfg.model.phi
    return complex(math.cos(phi), math.sin(phi))


def _expects_uniform(cfg: RunConfig, lam: complex) -> bool:
    if not isinstance(cfg.model, CPhiParams):
        return False
    return abs(lam - complex(math.cos(cfg.model.phi), math.sin(cfg.model.phi))) <= 1e-12


def _parameters(cfg: RunConfig) -> dict[str, Any]:
    out: dict[str, Any] = {"topology": str(cfg.topology), "model": cfg.model_kind}
    m = cfg.model
    if isinstance(m, CPhiParams):
        out.update(theta=m.theta, phi=m.phi, omega0=m.omega0)
    elif isinstance(m, RandomCoins):
        out.update(theta=m.theta, seed=m.seed)
    elif isinstance(m, np.ndarray):
        out.update(n_coins=len(m), periodic=cfg.periodic)
    elif isinstance(m, tuple):
        out.update(hopping=list(m))
    if cfg.command in ("simulate", "eigenstate", "cycle-check"):
        out.update(psi0=list(cfg.psi0))
        if cfg.lam is not None:
            out.update(**{"lambda": cfg.lam})
    if cfg.command == "simulate":
        out.update(steps=cfg.steps, initial=cfg.initial)
    if cfg.command in ("period", "dichotomy"):
        out.update(max_period=cfg.max_period)
    if cfg.command == "dichotomy":
        out.update(theta=cfg.theta)
    out["tolerances"] = dict(sorted(cfg.tolerances.items()))
    return out


def _simulate(cfg: RunConfig, out: Path, checks: _Checks) -> dict[str, Any]:
    coins = _coins(cfg)
    lam = _lambda(cfg)
    tol = cfg.tolerances
    op = EvolutionOperator(coins)
    eigen_mode = cfg.initial == "eigenstate"
    if eigen_mode:
        psi = build_eigenstate(coins, lam, cfg.psi0)
    else:
        psi = SpinorField.from_sites(cfg.topology, {0: cfg.psi0})

    measures: list[Measure] = []
    defects: list[float | None] = []
    residuals: list[float] = []
    for n in range(cfg.steps + 1):
        if n:
            psi = step(psi, op)
        mu = gamma_measure(psi)
        measures.append(mu)
        defects.append(uniformity_defect(mu) if mu.interior_sites().size else None)
        if eigen_mode:
            residuals.append(eigen_residual(psi, coins, lam))
    totals = [mu.total() for mu in measures]

    if eigen_mode:
        checks.add("max_eigen_residual", max(residuals), tol["residual"])
        if _expects_uniform(cfg, lam):
            checked = [d for d in defects if d is not None]
            checks.add("max_interior_uniformity_defect", max(checked), tol["uniformity"])
    norm_exact = isinstance(cfg.topology, Cycle) or (not eigen_mode and cfg.steps <= cfg.topology.half_width)
    if norm_exact:
        drift = max(abs(t - totals[0]) for t in totals) / max(totals[0], 1e-300)
        checks.add("relative_norm_drift", drift, tol["norm"])

    files = [
        write_measure_series(out / "measures", measures, cfg.output_format).name,
        write_field(out / "field", psi, cfg.output_format).name,
    ]
    return {
        "lambda": lam,
        "uniformity_defect_per_step": defects,
        "eigen_residual_per_step": residuals if eigen_mode else None,
        "total_mass_per_step": totals,
        "files": files,
    }


def _eigenstate(cfg: RunConfig, out: Path, checks: _Checks) -> dict[str, Any]:
    coins = _coins(cfg)
    lam = _lambda(cfg)
    psi = build_eigenstate(coins, lam, cfg.psi0)
    residual = eigen_residual(psi, coins, lam)
    defect = uniformity_defect(gamma_measure(psi))
    checks.add("eigen_residual", residual, cfg.tolerances["residual"])
    if _expects_uniform(cfg, lam):
        checks.add("uniformity_defect", defect, cfg.tolerances["uniformity"])
    return {
        "lambda": lam,
        "eigen_residual": residual,
        "uniformity_defect": defect,
        "files": [write_field(out / "field", psi, cfg.output_format).name],
    }


def _cycle_check(cfg: RunConfig, out: Path, checks: _Checks) -> dict[str, Any]:
    coins = _coins(cfg)
    lam = _lambda(cfg)
    tol = cfg.tolerances
    m = cfg.topology.size

    loop = cycle_product(coins, lam)
    product_defect = float(np.max(np.abs(loop - np.eye(2))))
    checks.add("product_defect", product_defect, tol["product"])

    res: dict[str, Any] = {"lambda": lam, "product_defect": product_defect, "loop_product": loop.tolist()}
    if _expects_uniform(cfg, lam):
        mats = plus_matrices(coins, lam, np.arange(1, m + 1))
        target = np.diag([lam * lam, (lam * lam).conjugate()])
        pair = max(float(np.max(np.abs(mats[(k + 1) % m] @ mats[k] - target))) for k in range(m))
        res["pair_product_defect"] = pair
        checks.add("pair_product_defect", pair, tol["pair"])

    psi = build_eigenstate(coins, lam, cfg.psi0)
    residual = eigen_residual(psi, coins, lam)
    checks.add("eigen_residual", residual, tol["eigvec"])
    defect = uniformity_defect(gamma_measure(psi))
    res.update(eigen_residual=residual, uniformity_defect=defect)
    if _expects_uniform(cfg, lam):
        checks.add("uniformity_defect", defect, tol["uniformity"])

    if m >= 2:
        u = dense_cycle_operator(coins)
        evals = np.linalg.eigvals(u)
        spectral = float(np.min(np.abs(evals - lam)))
        unitary = float(np.max(np.abs(u @ u.conj().T - np.eye(2 * m))))
        v = psi.flat()
        _, s, vh = np.linalg.svd(u - lam * np.eye(2 * m))
        basis = vh[s <= tol["spectrum"]].conj().T
        offspace = float(np.linalg.norm(v - basis @ (basis.conj().T @ v)) / np.linalg.norm(v))
        res.update(
            dense_unitarity_defect=unitary,
            spectral_distance=spectral,
            eigenspace_dimension=int(basis.shape[1]),
            eigenspace_distance=offspace,
        )
        checks.add("dense_unitarity_defect", unitary, tol["unitary"])
        checks.add("spectral_distance", spectral, tol["spectrum"])
        checks.add("eigenspace_distance", offspace, tol["eigvec"])
    res["files"] = [write_field(out / "field", psi, cfg.output_format).name]
    return res


def _period(cfg: RunConfig, out: Path, checks: _Checks) -> dict[str, Any]:
    coins = _coins(cfg)
    if not isinstance(coins.topology, Line):
        raise ConfigError("period detection needs a line topology")
    found = detect_period(coins, cfg.max_period, cfg.scan_width, cfg.tolerances["period"])
    label = found if found is not None else f"none <= {cfg.max_period}"
    if cfg.expected_period is not None:
        expected = None if cfg.expected_period == "none" else cfg.expected_period
        checks.expect("expected_period", found == expected)
    return {"period": label}


def _rw_check(cfg: RunConfig, out: Path, checks: _Checks) -> dict[str, Any]:
    hop = HoppingSequence.periodic(cfg.model, cfg.topology)
    report = uniform_stationarity_witness(hop, cfg.tolerances["witness"])
    mu1 = rw_step(Measure.constant(cfg.topology, 1.0), hop)
    sites = mu1.sites if isinstance(cfg.topology, Cycle) else mu1.sites[1:-1]
    vals = mu1.values if isinstance(cfg.topology, Cycle) else mu1.values[1:-1]
    fixed_point_defect = float(np.max(np.abs(vals - 1.0))) if len(sites) else 0.0
    # the witness and the direct one-step test must agree
    checks.expect(
        "witness_matches_fixed_point",
        report.is_uniform_stationary == (fixed_point_defect <= cfg.tolerances["witness"]),
    )
    sublattice_period = None
    if report.is_uniform_stationary:
        sublattice_period = 1 if np.ptp(hop.p) <= cfg.tolerances["witness"] else 2
    path = write_table(out / "rw_step", ("site", "mu"), zip(mu1.sites.tolist(), mu1.values))
    return {
        "is_uniform_stationary": report.is_uniform_stationary,
        "violating_site": report.violating_site,
        "fixed_point_defect": fixed_point_defect,
        "period": sublattice_period,
        "files": [path.name],
    }


def _dichotomy(cfg: RunConfig, out: Path, checks: _Checks) -> dict[str, Any]:
    if cfg.max_period < 2:
        raise ConfigError("dichotomy needs max_period >= 2")
    rows = dichotomy_table(cfg.max_period, theta=cfg.theta, tol=cfg.tolerances["residual"])
    report = []
    for r in rows:
        w = r.qw_witness
        report.append({
            "period": r.label,
            "rw_admits_uniform": r.rw_admits_uniform,
            "qw_admits_uniform": r.qw_admits_uniform,
            "qw_phi": w.phi,
            "qw_detected_period": w.detected_period,
            "qw_eigen_residual": w.eigen_residual,
            "qw_uniformity_defect": w.uniformity_defect,
        })
        checks.expect(f"qw_witness_{r.label}", r.qw_admits_uniform)
        checks.expect(f"rw_entry_{r.label}", r.rw_admits_uniform == (r.period is not None and r.period <= 2))
    path = write_table(out / "dichotomy", list(report[0]), [list(d.values()) for d in report])
    return {"table": report, "files": [path.name]}


_HANDLERS = {
    "simulate": _simulate,
    "eigenstate": _eigenstate,
    "cycle-check": _cycle_check,
    "period": _period,
    "rw-check": _rw_check,
    "dichotomy": _dichotomy,
}


def run(cfg: RunConfig, out: Path | None = None) -> int:
    """Execute one configured run, write its outputs, and return the exit status."""
    out = Path(out or cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    checks = _Checks()
    summary: dict[str, Any] = {"command": cfg.command, "parameters": _parameters(cfg)}
    try:
        summary["results"] = _HANDLERS[cfg.command](cfg, out, checks)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        summary.update(error={"kind": "config", "message": str(exc)}, checks=checks.items, status=EXIT_CONFIG)
        write_json(out / "summary.json", summary)
        return EXIT_CONFIG
    except DomainError as exc:
        log.error("domain error: %s", exc)
        summary.update(error={"kind": "domain", "message": str(exc)}, checks=checks.items, status=EXIT_DOMAIN)
        write_json(out / "summary.json", summary)
        return EXIT_DOMAIN
    status = EXIT_OK if checks.passed else EXIT_FAIL
    summary.update(checks=checks.items, status=status, **{"pass": checks.passed})
    write_json(out / "summary.json", summary)
    for c in checks.items:
        if not c["pass"]:
            log.warning("check failed: %s", c)
    return status


def _parse_tol(items: list[str]) -> dict[str, float]:
    tol = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            tol[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--tol value for {name} is not a number: {value!r}") from None
    return tol


def _load_yaml(path: Path) -> Any:
    try:
        return yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _run_raw(raw: Any, out: Path, tol: dict[str, float], seed: int | None) -> int:
    try:
        cfg = parse_config(raw, tol_overrides=tol, seed=seed, output_dir=out)
    except DomainError as exc:
        log.error("domain error: %s", exc)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "summary.json", {"error": {"kind": "domain", "message": str(exc)}, "status": EXIT_DOMAIN})
        return EXIT_DOMAIN
    except ConfigError as exc:
        log.error("config error: %s", exc)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "summary.json", {"error": {"kind": "config", "message": str(exc)}, "status": EXIT_CONFIG})
        return EXIT_CONFIG
    return run(cfg, out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qwstat", description=__doc__.split("\n\n")[0].strip())
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="YAML run configuration")
    src.add_argument("--sweep", type=Path, help="YAML list of run configurations, run concurrently")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: config output.dir or .)")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized coin models")
    p.add_argument("--jobs", type=int, default=None, help="worker threads for --sweep")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        tol = _parse_tol(args.tol)
        raw = _load_yaml(args.config or args.sweep)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    if args.config is not None:
        out = args.out
        if out is None and isinstance(raw, dict):
            out = Path((raw.get("output") or {}).get("dir") or ".")
        return _run_raw(raw, out, tol, args.seed)

    runs = raw.get("runs") if isinstance(raw, dict) else raw
    if not isinstance(runs, list) or not runs:
        log.error("config error: sweep file must hold a nonempty list of configs")
        return EXIT_CONFIG
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    dirs = [out / f"run_{i:03d}" for i in range(len(runs))]
    workers = args.jobs or min(len(runs), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(lambda rd: _run_raw(rd[0], rd[1], tol, args.seed), zip(runs, dirs)))
    write_json(out / "sweep.json", {"runs": [{"dir": d.name, "status": c} for d, c in zip(dirs, codes)]})
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
