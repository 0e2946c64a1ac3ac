"""Simulation configuration, presets and the INI config-file format."""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace

from .geometry import ArrayGeometry, l_shaped_selection

ESTIMATORS = ("proposed", "proposed_no_fbss", "ls")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    name: str = "custom"
    # arrays
    K: int = 16
    M: int = 16
    irs_kind: str = "ula"
    N: int = 32
    n_y: int = 0
    n_z: int = 0
    Q_t: int = 2
    Q_r: int = 2
    spacing: float = 0.5
    # paths
    L_F: int = 1
    L_G: int = 2
    angle_bounds: tuple[float, float] = (30.0, 150.0)
    azimuth_bounds: tuple[float, float] = (-90.0, 90.0)
    elevation_bounds: tuple[float, float] = (30.0, 150.0)
    min_separation: float = 0.0
    # training
    S: int = 64
    D: int = 16
    j_y: int = 1
    j_z: int = 1
    hybrid_iters: int = 20
    mu_scale: float = 1.0
    max_rank: int = 0
    completion_tol: float = 1e-8
    # sweep
    pnr_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    trials: int = 100
    seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "angle_bounds", tuple(float(x) for x in self.angle_bounds))
        object.__setattr__(self, "azimuth_bounds", tuple(float(x) for x in self.azimuth_bounds))
        object.__setattr__(self, "elevation_bounds",
                           tuple(float(x) for x in self.elevation_bounds))
        object.__setattr__(self, "pnr_db", tuple(float(x) for x in self.pnr_db))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.irs_kind == "upa" and self.N != self.n_y * self.n_z:
            object.__setattr__(self, "N", self.n_y * self.n_z)

    @property
    def planar(self):
        return self.irs_kind == "upa"

    @property
    def L(self):
        return self.L_F * self.L_G

    @property
    def rank_cap(self):
        # H0 = G diag(omega) F^T has rank at most min(L_F, L_G)
        return self.max_rank if self.max_rank > 0 else min(self.L_F, self.L_G)

    @property
    def overhead(self):
        """Training channel uses of the two-stage scheme, ``S + D * L_F``."""
        return self.S + self.D * self.L_F

    @property
    def overhead_ls(self):
        """Channel uses of the LS sweep, ``K N M / Q_r``."""
        return self.K * self.N * math.ceil(self.M / self.Q_r)

    def geometries(self):
        tx = ArrayGeometry.ula(self.K, self.spacing)
        rx = ArrayGeometry.ula(self.M, self.spacing)
        if self.planar:
            irs = ArrayGeometry.upa(self.n_y, self.n_z, self.spacing)
        else:
            irs = ArrayGeometry.ula(self.N, self.spacing)
        return tx, irs, rx

    def subarray(self):
        if not self.planar:
            return None
        return l_shaped_selection(self.n_y, self.n_z, self.j_y, self.j_z)

    def validate(self):
        positive = ["K", "M", "N", "Q_t", "Q_r", "L_F", "L_G", "S", "D", "trials",
                    "hybrid_iters"]
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.spacing <= 0:
            raise ConfigError("spacing must be positive")
        if self.irs_kind not in ("ula", "upa"):
            raise ConfigError(f"unknown irs_kind {self.irs_kind!r}")
        if self.planar and (self.n_y < 1 or self.n_z < 1):
            raise ConfigError("planar IRS needs n_y and n_z")
        if self.Q_t > self.K or self.Q_r > self.M:
            raise ConfigError("more RF chains than antennas")
        if self.L_G > self.Q_r or self.L_F > self.Q_t:
            raise ConfigError("L_G > Q_r or L_F > Q_t is not supported")
        if self.S * self.Q_r > self.M * self.K:
            raise ConfigError("S*Q_r exceeds the M*K entries of the probed matrix")
        if math.ceil(self.S / self.K) * self.Q_r > self.M:
            raise ConfigError("stage-1 schedule needs more combiner columns than M")
        if self.D < self.L + 1:
            raise ConfigError("D must be at least L_F*L_G + 1")
        if self.D > self.N:
            raise ConfigError("D cannot exceed the number of IRS elements")
        if self.planar:
            if not (1 <= self.j_y <= self.n_z and 1 <= self.j_z <= self.n_y):
                raise ConfigError("j_y/j_z out of range")
            expected = self.j_y * self.n_y + self.j_z * self.n_z - self.j_y * self.j_z
            if self.D != expected:
                raise ConfigError(f"L-shaped subarray has {expected} elements, D={self.D}")
            if min(self.n_y, self.n_z) <= self.L:
                raise ConfigError("subarray lines too short for L_F*L_G composite paths")
        elif self.M <= self.L_G or self.K <= self.L_F:
            raise ConfigError("arrays too short for the path counts")
        if not self.pnr_db:
            raise ConfigError("PNR grid is empty")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown or not self.estimators:
            raise ConfigError(f"unknown estimators {sorted(unknown)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self


PRESETS = {
    "fig5": SimConfig(name="fig5", K=16, M=16, N=32, Q_t=2, Q_r=2, L_F=1, L_G=2, S=64, D=16),
    "fig6": SimConfig(name="fig6", K=16, M=16, N=32, Q_t=2, Q_r=2, L_F=2, L_G=2, S=64, D=16),
    "fig7": SimConfig(name="fig7", K=32, M=32, irs_kind="upa", n_y=16, n_z=16, N=256,
                      Q_t=4, Q_r=4, L_F=2, L_G=2, S=128, D=31, j_y=1, j_z=1),
}


def preset(name, **overrides):
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


_TUPLE_FIELDS = {"angle_bounds", "azimuth_bounds", "elevation_bounds", "pnr_db", "estimators"}


def _parse_value(name, raw, current):
    raw = raw.strip()
    if name in _TUPLE_FIELDS:
        parts = [p.strip() for p in raw.replace(";", ",").split(",") if p.strip()]
        if name == "estimators":
            return tuple(parts)
        return tuple(float(p) for p in parts)
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def load_config(path, base=None):
    """Read an INI file; every key in every section maps onto a field.

    An optional ``preset`` key in ``[simulation]`` selects the starting
    point; other keys override it.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for section in parser.sections():
        values.update(parser.items(section))
    if base is None:
        base = preset(values.pop("preset")) if "preset" in values else SimConfig()
    else:
        values.pop("preset", None)
    known = {f.name: f for f in fields(SimConfig)}
    updates = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        updates[key] = _parse_value(key, raw, getattr(base, key))
    return replace(base, **updates)


def dump_config(cfg):
    """Render ``cfg`` in the INI layout accepted by :func:`load_config`."""
    d = asdict(cfg)
    sections = {
        "simulation": ["name", "seed", "trials", "pnr_db", "estimators", "jobs"],
        "arrays": ["K", "M", "irs_kind", "N", "n_y", "n_z", "Q_t", "Q_r", "spacing"],
        "paths": ["L_F", "L_G", "angle_bounds", "azimuth_bounds", "elevation_bounds",
                  "min_separation"],
        "training": ["S", "D", "j_y", "j_z", "hybrid_iters", "mu_scale", "max_rank",
                     "completion_tol"],
    }
    lines = []
    for sec, keys in sections.items():
        lines.append(f"[{sec}]")
        for k in keys:
            v = d[k]
            if isinstance(v, (tuple, list)):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{k} = {v}")
        lines.append("")
    return "\n".join(lines)


__all__ = ["SimConfig", "ConfigError", "PRESETS", "ESTIMATORS", "preset", "load_config",
           "dump_config"]
