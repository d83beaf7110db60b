"""Experiment configuration from INI files.

Grammar: ``[section]`` headers followed by ``key = value`` lines; values are
integers, floats, booleans (``true``/``false``) or bare strings.  Every key
has a default, so an empty file is a valid configuration.

Sections and keys::

    [surface]  kind = sphere | torus | ridge | plane ; radius ;
               major_radius ; minor_radius
    [mesh]     initial_h ; levels
    [grading]  enabled ; c_p ; kappa1 ; kappa2 ; h ; include_m4 ; max_sweeps ;
               min_h ; far_cap ; c1 ; kappa_samples
    [solver]   tol ; max_iter   (0 means 10 x dofs)
    [ridge]    study_h ; reference_factor ; dof_tolerance ; transfer_k
    [output]   dir ; vtk ; off
    [run]      seed

``kappa1`` / ``kappa2`` set to ``auto`` are measured by dense sampling.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError
from .geometry import Plane, RidgeSurface, Sphere, Torus


@dataclass
class SurfaceConfig:
    kind: str = "sphere"
    radius: float = 1.0
    major_radius: float = 1.0
    minor_radius: float = 0.4


@dataclass
class MeshConfig:
    initial_h: float = 0.5
    levels: int = 5


@dataclass
class GradingSection:
    enabled: bool = False
    c_p: float = 1.0
    kappa1: str = "auto"
    kappa2: str = "auto"
    h: float = 0.1
    include_m4: bool = False
    max_sweeps: int = 60
    min_h: float = 1e-6
    far_cap: float = 1.0
    c1: float = 0.25
    kappa_samples: int = 2048


@dataclass
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 0


@dataclass
class RidgeConfig:
    study_h: float = 0.3
    reference_factor: int = 8
    dof_tolerance: float = 0.10
    transfer_k: int = 16


@dataclass
class OutputConfig:
    dir: str = "out"
    vtk: bool = True
    off: bool = False


@dataclass
class RunConfig:
    seed: int = 0


@dataclass
class ExperimentConfig:
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    mesh: MeshConfig = field(default_factory=MeshConfig)
    grading: GradingSection = field(default_factory=GradingSection)
    solver: SolverConfig = field(default_factory=SolverConfig)
    ridge: RidgeConfig = field(default_factory=RidgeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def validate(self):
        for name in ("initial_h",):
            if getattr(self.mesh, name) <= 0:
                raise ConfigError(f"mesh.{name} must be positive")
        if self.mesh.levels < 1:
            raise ConfigError("mesh.levels must be at least 1")
        for name in ("h", "min_h", "far_cap", "c1", "c_p"):
            if getattr(self.grading, name) <= 0:
                raise ConfigError(f"grading.{name} must be positive")
        if self.ridge.study_h <= 0 or self.ridge.reference_factor < 1:
            raise ConfigError("ridge.study_h must be positive and reference_factor >= 1")
        if self.surface.kind not in ("sphere", "torus", "ridge", "plane"):
            raise ConfigError(f"unknown surface kind {self.surface.kind!r}")
        return self

    def as_ini(self):
        """Configuration echo in the input grammar (sorted, deterministic)."""
        out = []
        for sect in fields(self):
            out.append(f"[{sect.name}]")
            for k, v in asdict(getattr(self, sect.name)).items():
                out.append(f"{k} = {str(v).lower() if isinstance(v, bool) else v}")
            out.append("")
        return "\n".join(out)

    def make_surface(self):
        s = self.surface
        if s.kind == "sphere":
            return Sphere(s.radius)
        if s.kind == "torus":
            return Torus(s.major_radius, s.minor_radius)
        if s.kind == "ridge":
            return RidgeSurface()
        return Plane()


def _convert(raw, default, key):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from exc
    return raw.strip()


def load_config(path=None, text=None):
    """Read a configuration file (or string); unknown keys are errors."""
    cp = configparser.ConfigParser()
    try:
        if text is not None:
            cp.read_string(text)
        elif path is not None:
            with open(path) as fh:
                cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(str(exc)) from exc
    cfg = ExperimentConfig()
    for sect in cp.sections():
        if not hasattr(cfg, sect):
            raise ConfigError(f"unknown section [{sect}]")
        obj = getattr(cfg, sect)
        names = {f.name.lower(): f.name for f in fields(obj)}
        for key, raw in cp.items(sect):
            if key not in names:
                raise ConfigError(f"unknown key {sect}.{key}")
            name = names[key]
            setattr(obj, name, _convert(raw, getattr(obj, name), f"{sect}.{key}"))
    return cfg.validate()
