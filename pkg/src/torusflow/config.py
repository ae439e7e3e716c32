"""Run configuration: sectioned INI documents and built-in presets.

A config has the sections ``grid``, ``solver``, ``initial``, ``forcing``,
``observers``, ``partition``, ``norms`` and ``run``; the seed lives in
``run``.  Unknown observer names or malformed values raise
:class:`ConfigError`.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace

from .besov import BesovParams
from .fourier_core import GridError, PeriodicGrid
from .littlewood_paley import PartitionMode, PartitionProfile
from .spectral_nse import Dealias, SolverConfig

__all__ = [
    "ConfigError",
    "OBSERVER_NAMES",
    "PRESETS",
    "RunConfig",
    "load_config",
    "parse_config",
    "preset",
]


class ConfigError(ValueError):
    pass


OBSERVER_NAMES = (
    "energy",
    "dissipation",
    "forcing_power",
    "l2_norm",
    "forcing_l2",
    "shell_energies",
    "shell_dissipation",
    "sobolev",
    "besov",
)


@dataclass(frozen=True)
class RunConfig:
    name: str = "custom"
    dim: int = 2
    n: int = 32
    length: float = 2.0 * math.pi
    nu: float = 0.1
    dt: float = 1e-3
    t_end: float = 0.1
    dealias: str = "two_thirds"
    scheme: str = "ifrk4"
    truncation: int | None = None
    initial: str = "zero"
    initial_params: dict = field(default_factory=dict)
    forcing: str = "none"
    forcing_params: dict = field(default_factory=dict)
    cadence: float = 1e-2
    observers: tuple[str, ...] = OBSERVER_NAMES
    partition_mode: str = "energy"
    c1: float = 0.5
    c2: float = 2.0
    sobolev_orders: tuple[float, ...] = (1.0,)
    besov: tuple[tuple[float, float, float], ...] = ((1.0, 2.0, 2.0),)
    seed: int = 0

    def __post_init__(self):
        try:
            self.grid()
            self.solver()
            self.partition_profile()
            self.besov_params()
        except (GridError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        for name in self.observers:
            if name not in OBSERVER_NAMES:
                raise ConfigError(f"unknown observer {name!r}; choose from {OBSERVER_NAMES}")
        for key, v in (("t_end", self.t_end), ("cadence", self.cadence), ("nu", self.nu)):
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{key} must be finite and nonnegative, got {v}")
        if self.cadence <= 0:
            raise ConfigError("cadence must be positive")

    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.dim, self.n, self.length)

    def solver(self) -> SolverConfig:
        return SolverConfig(self.dt, self.scheme, Dealias(self.dealias))

    def partition_profile(self) -> PartitionProfile:
        return PartitionProfile(PartitionMode(self.partition_mode), self.c1, self.c2)

    def besov_params(self) -> tuple[BesovParams, ...]:
        return tuple(BesovParams(*t) for t in self.besov)

    def with_seed(self, seed: int | None) -> RunConfig:
        return self if seed is None else replace(self, seed=int(seed))

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["grid"] = {"dim": str(self.dim), "n": str(self.n), "length": repr(self.length)}
        cp["solver"] = {
            "nu": repr(self.nu),
            "dt": repr(self.dt),
            "t_end": repr(self.t_end),
            "dealias": self.dealias,
            "scheme": self.scheme,
        }
        if self.truncation is not None:
            cp["solver"]["truncation"] = str(self.truncation)
        cp["initial"] = {"kind": self.initial, **{k: str(v) for k, v in self.initial_params.items()}}
        cp["forcing"] = {"kind": self.forcing, **{k: str(v) for k, v in self.forcing_params.items()}}
        cp["observers"] = {"cadence": repr(self.cadence), "names": ", ".join(self.observers)}
        cp["partition"] = {"mode": self.partition_mode, "c1": repr(self.c1), "c2": repr(self.c2)}
        cp["norms"] = {
            "sobolev": ", ".join(f"{s:g}" for s in self.sobolev_orders),
            "besov": "; ".join(" ".join(f"{x:g}" for x in t) for t in self.besov),
        }
        cp["run"] = {"name": self.name, "seed": str(self.seed)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _number(text: str) -> float:
    text = text.strip().lower()
    return math.inf if text in ("inf", "infinity") else float(text)


def _triples(text: str) -> tuple[tuple[float, float, float], ...]:
    out = []
    for chunk in text.split(";"):
        parts = chunk.replace(",", " ").split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ConfigError(f"norm triple needs 's p q', got {chunk.strip()!r}")
        out.append(tuple(_number(x) for x in parts))
    return tuple(out)


def _params(section: configparser.SectionProxy) -> dict:
    return {k: v for k, v in section.items() if k != "kind"}


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from None
    known = {"grid", "solver", "initial", "forcing", "observers", "partition", "norms", "run"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown config sections {sorted(extra)}")
    base = RunConfig()
    if "run" in cp and "preset" in cp["run"]:
        base = preset(cp["run"]["preset"])
    kw: dict = {}
    try:
        if "grid" in cp:
            g = cp["grid"]
            kw.update(dim=g.getint("dim", base.dim), n=g.getint("n", base.n))
            kw["length"] = g.getfloat("length", base.length)
        if "solver" in cp:
            s = cp["solver"]
            kw.update(
                nu=s.getfloat("nu", base.nu),
                dt=s.getfloat("dt", base.dt),
                t_end=s.getfloat("t_end", base.t_end),
                dealias=s.get("dealias", base.dealias),
                scheme=s.get("scheme", base.scheme),
            )
            if "truncation" in s:
                kw["truncation"] = s.getint("truncation")
        if "initial" in cp:
            kw.update(initial=cp["initial"].get("kind", base.initial), initial_params=_params(cp["initial"]))
        if "forcing" in cp:
            kw.update(forcing=cp["forcing"].get("kind", base.forcing), forcing_params=_params(cp["forcing"]))
        if "observers" in cp:
            o = cp["observers"]
            kw["cadence"] = o.getfloat("cadence", base.cadence)
            if "names" in o:
                kw["observers"] = tuple(x.strip() for x in o["names"].split(",") if x.strip())
        if "partition" in cp:
            p = cp["partition"]
            kw.update(
                partition_mode=p.get("mode", base.partition_mode),
                c1=p.getfloat("c1", base.c1),
                c2=p.getfloat("c2", base.c2),
            )
        if "norms" in cp:
            nm = cp["norms"]
            if "sobolev" in nm:
                kw["sobolev_orders"] = tuple(_number(x) for x in nm["sobolev"].split(",") if x.strip())
            if "besov" in nm:
                kw["besov"] = _triples(nm["besov"])
        if "run" in cp:
            r = cp["run"]
            kw.update(name=r.get("name", r.get("preset", base.name)), seed=r.getint("seed", base.seed))
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return replace(base, **kw)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


PRESETS: dict[str, RunConfig] = {
    "taylor-green-2d": RunConfig(
        name="taylor-green-2d",
        n=64,
        nu=0.1,
        dt=1e-3,
        t_end=1.0,
        cadence=1e-2,
        initial="taylor-green",
        initial_params={"amplitude": 1.0},
    ),
    "stokes-mode": RunConfig(
        name="stokes-mode",
        n=32,
        nu=0.1,
        dt=1e-3,
        t_end=0.5,
        cadence=1e-3,
        initial="shear",
        initial_params={"wavenumber": 2, "amplitude": 1.0},
    ),
    "forced-single-mode": RunConfig(
        name="forced-single-mode",
        n=32,
        nu=0.1,
        dt=4e-2,
        t_end=80.0,
        cadence=0.4,
        initial="random-div-free",
        initial_params={"rms": 0.05, "peak": 3.0},
        forcing="steady",
        forcing_params={"wavenumber": 1, "amplitude": 0.2},
        seed=7,
    ),
    "random-div-free": RunConfig(
        name="random-div-free",
        n=32,
        nu=0.05,
        dt=5e-3,
        t_end=2.0,
        cadence=5e-2,
        initial="random-div-free",
        initial_params={"rms": 1.0, "peak": 4.0},
        seed=1,
    ),
    "zero": RunConfig(name="zero", n=32, t_end=0.1, cadence=1e-2),
    "two-shell": RunConfig(
        name="two-shell",
        n=128,
        nu=0.01,
        dt=1e-3,
        t_end=0.01,
        cadence=1e-3,
        initial="two-shell",
        initial_params={"low": 4, "high": 32, "amplitude": 1.0},
    ),
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]
