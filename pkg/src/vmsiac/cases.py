"""Benchmark initial conditions and run configuration.

Configuration files use a flat ``key = value`` text format: one entry per
line, ``#`` starts a comment, keys are the :class:`RunConfig` field names
(``case``, ``nx``, ``nv``, ``k``, ``cfl``, ``t_final``, ``filter``,
``dt_mode``, ``dt_rule``, ``error_norm``, ``out``, ``snapshot_every``,
``n_project``) and the case parameters prefixed with ``param.`` (for
example ``param.A = 0.5``).
Booleans are ``true``/``false``; ``none`` leaves an optional value unset.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .kinetic import SystemKind
from .mesh import AxisSpec, Mesh, build_mesh

CASES = ("landau", "two_stream", "weibel")

_DEFAULT_CFL = {1: 0.1, 2: 0.2, 3: 0.1}
_WEIBEL_CFL = 0.1


@dataclass(frozen=True)
class BenchmarkParams:
    """Case constants; unused entries are ignored by the other cases."""

    A: float = 0.5
    wavenumber: float = 0.5
    L: float = 4.0 * math.pi
    vc: float = 6.0 * math.pi
    beta: float = 0.01
    b: float = 0.001
    delta: float = 0.5
    omega1: float = 0.3
    omega2: float = 0.3
    kappa0: float = 0.2
    vmax: float = 1.8

    @classmethod
    def for_case(cls, case: str, **overrides) -> BenchmarkParams:
        if case not in CASES:
            raise ConfigurationError(f"unknown case {case!r}; choose from {CASES}")
        base = cls(A=0.05) if case == "two_stream" else cls()
        return replace(base, **overrides)

    def __post_init__(self):
        for name in ("wavenumber", "L", "vc", "beta", "kappa0", "vmax"):
            if not getattr(self, name) > 0.0:
                raise ConfigurationError(f"parameter {name} must be positive")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigurationError("delta must lie in [0, 1]")


@dataclass
class InitialCondition:
    kind: SystemKind
    f: Callable[..., np.ndarray]
    fields: tuple[Callable[..., np.ndarray], ...]


def _maxwellian(v):
    return np.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)


def landau_ic(params: BenchmarkParams) -> InitialCondition:
    """``f = f_M(v) (1 + A cos(kx))`` with ``E = (A/k) sin(kx)``."""
    A, k = params.A, params.wavenumber

    def f(x, v):
        return _maxwellian(v) * (1.0 + A * np.cos(k * x))

    def e(x):
        return (A / k) * np.sin(k * x)

    return InitialCondition(SystemKind.VLASOV_AMPERE, f, (e,))


def two_stream_ic(params: BenchmarkParams) -> InitialCondition:
    """``f = v^2 f_M(v) (1 + A cos(kx))`` with ``E = (A/k) sin(kx)``."""
    A, k = params.A, params.wavenumber

    def f(x, v):
        return v * v * _maxwellian(v) * (1.0 + A * np.cos(k * x))

    def e(x):
        return (A / k) * np.sin(k * x)

    return InitialCondition(SystemKind.VLASOV_AMPERE, f, (e,))


def weibel_ic(params: BenchmarkParams) -> InitialCondition:
    """Counter-streaming beams in ``v1`` with a seeded ``B3 = b sin(kappa0 x)``."""
    beta, d = params.beta, params.delta
    w1, w2, b, kap = params.omega1, params.omega2, params.b, params.kappa0

    def f(x, v1, v2):
        beams = d * np.exp(-(v1 - w1) ** 2 / beta) + (1.0 - d) * np.exp(-(v1 + w2) ** 2 / beta)
        out = np.exp(-v2 * v2 / beta) * beams / (math.pi * beta)
        return np.broadcast_to(out, np.broadcast_shapes(np.shape(x), np.shape(out)))

    def zero(x):
        return np.zeros_like(x)

    def b3(x):
        return b * np.sin(kap * x)

    return InitialCondition(SystemKind.STREAMING_WEIBEL, f, (zero, zero, b3))


INITIAL_CONDITIONS = {"landau": landau_ic, "two_stream": two_stream_ic, "weibel": weibel_ic}


@dataclass
class RunConfig:
    case: str = "landau"
    nx: int = 32
    nv: int = 32
    k: int = 1
    cfl: float | None = None
    t_final: float = 1.0
    filter: bool = True
    dt_mode: str = "adaptive"
    dt_rule: str = "degree"
    error_norm: str = "rms"  # "rms": L2 / sqrt(|domain|); "absolute": plain L2
    out: str | None = None
    snapshot_every: int = 0
    n_project: int | None = None
    params: BenchmarkParams = field(default_factory=BenchmarkParams)

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigurationError(f"unknown case {self.case!r}; choose from {CASES}")
        for name in ("nx", "nv"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer")
        if self.k not in (1, 2, 3):
            raise ConfigurationError(f"degree k={self.k} is not supported")
        if self.cfl is not None and not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError("cfl must lie in (0, 1]")
        if self.t_final < 0.0:
            raise ConfigurationError("t_final must be nonnegative")
        if self.dt_mode not in ("adaptive", "frozen"):
            raise ConfigurationError(f"unknown dt_mode {self.dt_mode!r}")
        if self.dt_rule not in ("degree", "p1"):
            raise ConfigurationError(f"unknown dt_rule {self.dt_rule!r}")
        if self.error_norm not in ("rms", "absolute"):
            raise ConfigurationError(f"unknown error_norm {self.error_norm!r}")
        if self.snapshot_every < 0:
            raise ConfigurationError("snapshot_every must be >= 0")
        if self.n_project is not None and self.n_project < self.k + 1:
            raise ConfigurationError("n_project must be at least k + 1")

    @classmethod
    def for_case(cls, case: str, **kwargs) -> RunConfig:
        params = kwargs.pop("params", None) or BenchmarkParams.for_case(case)
        return cls(case=case, params=params, **kwargs)

    @property
    def kind(self) -> SystemKind:
        return INITIAL_CONDITIONS[self.case](self.params).kind

    @property
    def effective_cfl(self) -> float:
        if self.cfl is not None:
            return self.cfl
        return _WEIBEL_CFL if self.case == "weibel" else _DEFAULT_CFL[self.k]

    @property
    def projection_points(self) -> int:
        if self.n_project is not None:
            return self.n_project
        return 10 if self.case != "weibel" else 8

    def initial_condition(self) -> InitialCondition:
        return INITIAL_CONDITIONS[self.case](self.params)

    def mesh(self) -> Mesh:
        p = self.params
        if self.case == "weibel":
            x = AxisSpec(0.0, 2.0 * math.pi / p.kappa0, self.nx, periodic=True)
            v = AxisSpec(-p.vmax, p.vmax, self.nv)
            return build_mesh([x], [v, v])
        x = AxisSpec(0.0, p.L, self.nx, periodic=True)
        return build_mesh([x], [AxisSpec(-p.vc, p.vc, self.nv)])

    def mesh_label(self) -> str:
        return self.mesh().describe()


# --------------------------------------------------------------------------
# flat key = value files

_NONE = "none"


def _format(value) -> str:
    if value is None:
        return _NONE
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(name: str, text: str, default):
    text = text.strip()
    if text.lower() == _NONE:
        return None
    if name in ("filter",):
        low = text.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigurationError(f"{name} expects true/false, got {text!r}")
        return low in ("true", "1", "yes")
    if name in ("nx", "nv", "k", "snapshot_every", "n_project"):
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigurationError(f"{name} expects an integer, got {text!r}") from exc
    if name in ("cfl", "t_final") or isinstance(default, float):
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigurationError(f"{name} expects a number, got {text!r}") from exc
    return text


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse a flat ``key = value`` config; unknown keys are errors."""
    entries, params = {}, {}
    field_names = {f.name for f in fields(RunConfig)} - {"params"}
    param_names = {f.name for f in fields(BenchmarkParams)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("param."):
            name = key[len("param."):]
            if name not in param_names:
                raise ConfigurationError(f"line {lineno}: unknown parameter {name!r}")
            params[name] = _coerce(name, value, 0.0)
        elif key in field_names:
            entries[key] = _coerce(key, value, getattr(RunConfig, key, None))
        else:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
    return merge_config(base, entries, params)


def merge_config(base: RunConfig | None, entries: dict, params: dict | None = None) -> RunConfig:
    """Overlay ``entries`` (and ``param.*`` values) on ``base``.

    Changing the case resets the parameter block to that case's defaults
    before applying ``params``.
    """
    params = dict(params or {})
    case = entries.get("case", base.case if base else "landau")
    if base is None or case != base.case:
        block = BenchmarkParams.for_case(case)
    else:
        block = base.params
    block = replace(block, **params)
    current = asdict(base) if base else {}
    current.pop("params", None)
    current.update({k: v for k, v in entries.items()})
    current["case"] = case
    return RunConfig(**current, params=block)


def serialize_config(config: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        if f.name != "params":
            lines.append(f"{f.name} = {_format(getattr(config, f.name))}")
    for f in fields(BenchmarkParams):
        lines.append(f"param.{f.name} = {_format(getattr(config.params, f.name))}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), base)


def save_config(config: RunConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_config(config))
    return path
