"""Run configuration: one YAML/JSON file fixes a run bit for bit."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .lattice import LatticeGeometry, ModelSpec
from .reporting import IndexSettings

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """The configuration file is malformed or inconsistent."""


@dataclass
class RunConfig:
    model: dict
    tolerance: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    mu: float = 0.0

    def model_spec(self) -> ModelSpec:
        m = dict(self.model)
        try:
            geometry = LatticeGeometry(
                Lx=int(m.pop("Lx")),
                Ly=int(m.pop("Ly")),
                boundary_x=m.pop("boundary_x", "periodic"),
                boundary_y=m.pop("boundary_y", "periodic"),
            )
            spec = ModelSpec(
                m=float(m.pop("m")),
                lambda_r=float(m.pop("lambda_r", 0.0)),
                w=float(m.pop("w", 0.0)),
                seed=int(m.pop("seed", 0)),
                geometry=geometry,
            )
        except KeyError as exc:
            raise ConfigError(f"model block is missing key {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model block is invalid: {exc}") from exc
        if m:
            raise ConfigError(f"unknown model keys: {sorted(m)}")
        return spec

    def index_settings(self) -> IndexSettings:
        t = dict(self.tolerance)
        try:
            settings = IndexSettings(
                filter_radius=t.pop("filter_radius", None),
                localization_threshold=float(t.pop("localization_threshold", 0.9)),
                tol_high=float(t.pop("tol_high", 0.5)),
                tol_low=float(t.pop("tol_low", 1e-6)),
                sweep_points=int(t.pop("sweep_points", 12)),
                plateau_decades=float(t.pop("plateau_decades", 1.0)),
                cluster_tol=float(t.pop("cluster_tol", 1e-7)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"tolerance block is invalid: {exc}") from exc
        if t:
            raise ConfigError(f"unknown tolerance keys: {sorted(t)}")
        return settings

    def scan_values(self):
        s = dict(self.scan)
        m_values = [float(x) for x in s.pop("m_values", [self.model.get("m", 1.0)])]
        disorder = []
        block = s.pop("disorder", None)
        if block:
            try:
                lam = float(block["lambda_r"])
                w = float(block["w"])
                seeds = [int(x) for x in block["seeds"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"scan.disorder block is invalid: {exc}") from exc
            disorder = [(lam, w, seed) for seed in seeds]
        if s:
            raise ConfigError(f"unknown scan keys: {sorted(s)}")
        return m_values, disorder

    def resolved(self) -> dict:
        """Full configuration as written into every report."""
        out = asdict(self)
        out["tolerance"] = {
            k: (None if v is None else v)
            for k, v in asdict(self.index_settings()).items()
        }
        return out


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    known = {"model", "tolerance", "scan", "output", "mu"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    if "model" not in raw:
        raise ConfigError(f"{path}: missing required 'model' block")
    cfg = RunConfig(
        model=dict(raw["model"]),
        tolerance=dict(raw.get("tolerance") or {}),
        scan=dict(raw.get("scan") or {}),
        output=dict(raw.get("output") or {}),
        mu=float(raw.get("mu", 0.0)),
    )
    cfg.model_spec()
    cfg.index_settings()
    cfg.scan_values()
    return cfg
