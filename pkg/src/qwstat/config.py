"""Run configuration: parsing a YAML document into a validated :class:`RunConfig`."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .coin import CPhiParams
from .errors import DomainError
from .topology import Cycle, Line, Topology

COMMANDS = ("simulate", "eigenstate", "cycle-check", "period", "rw-check", "dichotomy")

DEFAULT_TOLERANCES = {
    "residual": 1e-10,
    "uniformity": 1e-9,
    "product": 1e-10,
    "pair": 1e-12,
    "spectrum": 1e-9,
    "eigvec": 1e-9,
    "norm": 1e-10,
    "period": 1e-9,
    "unitary": 1e-12,
    "witness": 1e-12,
}


class ConfigError(ValueError):
    """The run configuration is malformed or inconsistent."""


_PI_RE = re.compile(r"^(?P<coef>[-+]?[0-9./]*)\*?pi(?:/(?P<den>[0-9.]+))?$")


def parse_angle(value: Any) -> float:
    """
    Angle in radians from a number or a multiple of pi.

    Accepted strings include ``"pi"``, ``"-pi/2"``, ``"2pi/3"``, ``"1/3pi"``,
    ``"0.25*pi"``; anything without ``pi`` is read as radians.
    """
    if isinstance(value, bool):
        raise ConfigError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"not an angle: {value!r}")
    s = value.strip().lower().replace(" ", "").replace("π", "pi")
    if "pi" not in s:
        try:
            return float(s)
        except ValueError:
            raise ConfigError(f"not an angle: {value!r}") from None
    m = _PI_RE.match(s)
    if not m:
        raise ConfigError(f"not an angle: {value!r}")
    coef = m.group("coef")
    try:
        c = Fraction({"": "1", "+": "1", "-": "-1"}.get(coef, coef))
        if m.group("den"):
            c /= Fraction(m.group("den"))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not an angle: {value!r}") from None
    return float(c) * math.pi


def parse_complex(value: Any) -> complex:
    """Complex number from a number, ``"a+bj"`` string, ``[re, im]`` pair or ``{abs, arg}`` map."""
    if isinstance(value, bool):
        raise ConfigError(f"not a complex number: {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"not a complex number: {value!r}") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict) and set(value) == {"abs", "arg"}:
        r, t = float(value["abs"]), parse_angle(value["arg"])
        return complex(r * math.cos(t), r * math.sin(t))
    raise ConfigError(f"not a complex number: {value!r}")


@dataclass(frozen=True)
class RandomCoins:
    """Coins with fixed ``theta`` and independent uniform phases, drawn from ``seed``."""

    theta: float
    seed: int


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: CPhiParams | np.ndarray | RandomCoins | tuple[float, ...] | None
    topology: Topology
    lam: complex | None = None
    steps: int = 0
    psi0: tuple[complex, complex] = (1.0 + 0j, 0j)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: Path | None = None
    output_format: str = "csv"
    periodic: bool = True
    initial: str = "eigenstate"
    max_period: int = 10
    scan_width: int | None = None
    expected_period: int | str | None = None
    theta: float = math.pi / 4
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def model_kind(self) -> str:
        if isinstance(self.model, CPhiParams):
            return "cphi"
        if isinstance(self.model, RandomCoins):
            return "random_coins"
        if isinstance(self.model, np.ndarray):
            return "coins"
        if isinstance(self.model, tuple):
            return "hopping"
        return "none"


def _topology(raw: Any, command: str) -> Topology:
    if raw is None:
        if command in ("period", "dichotomy"):
            return Line(0)
        raise ConfigError("topology is required: {line: L} or {cycle: m}")
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError(f"topology must be a single-key map, got {raw!r}")
    (kind, size), = raw.items()
    if not isinstance(size, int) or isinstance(size, bool):
        raise ConfigError(f"topology size must be an integer, got {size!r}")
    try:
        if kind == "line":
            return Line(size)
        if kind == "cycle":
            return Cycle(size)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown topology {kind!r}")


def _coin_table(raw: Any) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("coins must be a nonempty list of [a, b, c, d] entries")
    rows = []
    for coin in raw:
        flat = coin
        if isinstance(coin, list) and len(coin) == 2 and all(isinstance(r, list) and len(r) == 2 for r in coin):
            # nested [[a, b], [c, d]]
            flat = [*coin[0], *coin[1]]
        if not isinstance(flat, list) or len(flat) != 4:
            raise ConfigError(f"each coin needs four entries a, b, c, d; got {coin!r}")
        rows.append([parse_complex(v) for v in flat])
    return np.array(rows, dtype=np.complex128).reshape(-1, 2, 2)


def _model(raw: Any, topology: Topology, seed: int) -> Any:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError(f"model must be a map, got {raw!r}")
    sources = [k for k in ("cphi", "coins", "random_coins", "hopping") if k in raw]
    if len(sources) != 1:
        raise ConfigError(f"model needs exactly one of cphi, coins, random_coins, hopping (got {sources})")
    kind = sources[0]
    body = raw[kind]
    if kind == "cphi":
        if not isinstance(body, dict) or "theta" not in body:
            raise ConfigError("cphi model needs at least theta")
        if "phi" in body:
            phi = parse_angle(body["phi"])
        elif isinstance(topology, Cycle) and topology.size % 2 == 0:
            # default ramp on C_{2N}: phi = pi / N
            phi = 2.0 * math.pi / topology.size
        else:
            raise ConfigError("cphi model needs phi (it defaults to pi/N only on a cycle C_2N)")
        try:
            return CPhiParams(parse_angle(body["theta"]), phi, parse_angle(body.get("omega0", 0.0)))
        except DomainError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if kind == "coins":
        return _coin_table(body)
    if kind == "random_coins":
        if not isinstance(body, dict) or "theta" not in body:
            raise ConfigError("random_coins model needs theta")
        return RandomCoins(parse_angle(body["theta"]), int(body.get("seed", seed)))
    if not isinstance(body, list) or not body:
        raise ConfigError("hopping must be a nonempty list of probabilities")
    try:
        return tuple(float(p) for p in body)
    except (TypeError, ValueError):
        raise ConfigError(f"bad hopping probabilities: {body!r}") from None


def _int(raw: dict, key: str, default: int | None, minimum: int = 0) -> int | None:
    v = raw.get(key, default)
    if v is None:
        return None
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {v!r}")
    return v


def parse_config(
    raw: Any,
    *,
    tol_overrides: dict[str, float] | None = None,
    seed: int | None = None,
    output_dir: Path | None = None,
) -> RunConfig:
    """Validate a decoded YAML document and build a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a map")
    unknown = set(raw) - {
        "command", "model", "topology", "lambda", "lambda_phase", "steps", "psi0", "tolerances",
        "output", "periodic", "initial", "max_period", "scan_width", "expected_period", "theta", "seed",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")

    topology = _topology(raw.get("topology"), command)
    if command == "cycle-check" and not isinstance(topology, Cycle):
        raise ConfigError("cycle-check requires a cycle topology")
    if seed is None:
        seed = _int(raw, "seed", 0)
    model = _model(raw.get("model"), topology, seed)

    needs = {
        "simulate": ("cphi", "coins", "random_coins"),
        "eigenstate": ("cphi", "coins", "random_coins"),
        "cycle-check": ("cphi", "coins", "random_coins"),
        "period": ("cphi", "coins", "random_coins"),
        "rw-check": ("hopping",),
        "dichotomy": ("none",),
    }[command]
    probe = RunConfig(command, model, topology)
    if probe.model_kind not in needs:
        raise ConfigError(f"command {command} needs a model of kind {needs}, got {probe.model_kind}")

    if "lambda" in raw and "lambda_phase" in raw:
        raise ConfigError("give lambda or lambda_phase, not both")
    lam = None
    if "lambda" in raw:
        lam = parse_complex(raw["lambda"])
    elif "lambda_phase" in raw:
        t = parse_angle(raw["lambda_phase"])
        lam = complex(math.cos(t), math.sin(t))
    if lam is None and command in ("simulate", "eigenstate", "cycle-check") and not isinstance(model, CPhiParams):
        raise ConfigError(f"{command} with explicit coins needs lambda or lambda_phase")

    psi0_raw = raw.get("psi0", [1, 0])
    if not isinstance(psi0_raw, list) or len(psi0_raw) != 2:
        raise ConfigError(f"psi0 must be a pair of complex numbers, got {psi0_raw!r}")
    psi0 = (parse_complex(psi0_raw[0]), parse_complex(psi0_raw[1]))
    if psi0 == (0, 0):
        raise ConfigError("psi0 must be nonzero")

    tolerances = dict(DEFAULT_TOLERANCES)
    for source in (raw.get("tolerances") or {}, tol_overrides or {}):
        for name, value in source.items():
            if name not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {name!r}; known: {sorted(DEFAULT_TOLERANCES)}")
            try:
                tolerances[name] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(f"tolerance {name} must be a number, got {value!r}") from None

    output = raw.get("output") or {}
    if not isinstance(output, dict):
        raise ConfigError("output must be a map with optional dir and format")
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {fmt!r}")
    if output_dir is None and output.get("dir") is not None:
        output_dir = Path(output["dir"])

    initial = raw.get("initial", "eigenstate")
    if initial not in ("eigenstate", "localized"):
        raise ConfigError(f"initial must be eigenstate or localized, got {initial!r}")

    return RunConfig(
        command=command,
        model=model,
        topology=topology,
        lam=lam,
        steps=_int(raw, "steps", 0),
        psi0=psi0,
        tolerances=tolerances,
        output_dir=output_dir,
        output_format=fmt,
        periodic=bool(raw.get("periodic", True)),
        initial=initial,
        max_period=_int(raw, "max_period", 10, minimum=1),
        scan_width=_int(raw, "scan_width", None, minimum=1),
        expected_period=(
            "none" if raw.get("expected_period") == "none" else _int(raw, "expected_period", None, minimum=1)
        ),
        theta=parse_angle(raw.get("theta", math.pi / 4)),
        raw=raw,
    )
