"""Run configuration: YAML in engineering units, validated into core types.

Network quantities are written as BS/km², W and dBm and converted to SI
when the configuration is resolved.
"""

from __future__ import annotations

import copy
import math
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .ase import LinkConfig
from .errors import ConfigError, DomainError
from .fading import GtrParams, SevereParams, Truncated, Uniform, VonMises
from .interference import NetworkParams
from .montecarlo import SimConfig

FADING_MODELS = ("rayleigh", "rician", "gtr_u", "gtr_t", "gtr_v", "severe_u", "severe_t", "severe_v")
RUN_METHODS = ("exact", "lower_bound", "severe", "simulate", "both")
FORMATS = ("csv", "svg", "both")

# fields each model accepts beyond ``model``
_ALLOWED = {
    "rayleigh": {"sigma_sq", "omega"},
    "rician": {"k", "sigma_sq", "omega"},
    "gtr_u": {"k", "delta", "sigma_sq", "omega"},
    "gtr_t": {"k", "delta", "sigma_sq", "omega", "p"},
    "gtr_v": {"k", "delta", "sigma_sq", "omega", "concentration"},
    "severe_u": {"delta", "omega"},
    "severe_t": {"delta", "omega", "p"},
    "severe_v": {"delta", "omega", "concentration"},
}
_REQUIRED = {
    "rician": {"k"},
    "gtr_u": {"k"},
    "gtr_t": {"k", "p"},
    "gtr_v": {"k", "concentration"},
    "severe_u": {"omega"},
    "severe_t": {"omega", "p"},
    "severe_v": {"omega", "concentration"},
}


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NetworkSpec(_Strict):
    lambda_per_km2: float = 3.0
    power_w: float = 3.0
    eta: float = 4.0
    noise_dbm: float = -80.0

    def resolve(self):
        return NetworkParams(
            lam=self.lambda_per_km2 * 1e-6,
            power=self.power_w,
            eta=self.eta,
            noise=dbm_to_watt(self.noise_dbm),
        )


class FadingSpec(_Strict):
    model: Literal[FADING_MODELS]
    k: Optional[float] = None
    delta: Optional[float] = None
    sigma_sq: Optional[float] = None
    omega: Optional[float] = None
    p: Optional[float] = None
    concentration: Optional[float] = None

    @model_validator(mode="after")
    def _fields_match_model(self):
        given = {f for f in _ALLOWED["gtr_v"] | {"p"} if getattr(self, f) is not None}
        extra = given - _ALLOWED[self.model]
        if extra:
            raise ValueError(f"{sorted(extra)} not used by model {self.model!r}")
        missing = _REQUIRED.get(self.model, set()) - given
        if missing:
            raise ValueError(f"model {self.model!r} needs {sorted(missing)}")
        if not self.model.startswith("severe"):
            if self.sigma_sq is not None and self.omega is not None:
                raise ValueError("give either sigma_sq or omega, not both")
            if self.sigma_sq is None and self.omega is None:
                raise ValueError("one of sigma_sq or omega is required")
        return self

    def _phase(self):
        kind = self.model.rsplit("_", 1)[-1]
        if kind == "t":
            return Truncated(self.p)
        if kind == "v":
            return VonMises(self.concentration)
        return Uniform()

    def resolve(self):
        if self.model.startswith("severe"):
            delta = 1.0 if self.delta is None else self.delta
            return SevereParams(omega=self.omega, delta=delta, phase=self._phase())
        k = 0.0 if self.model == "rayleigh" else self.k
        delta = 0.0 if self.model in ("rayleigh", "rician") else self.delta
        if delta is None:
            delta = 1.0
        phase = self._phase() if self.model.startswith("gtr") else Uniform()
        if self.omega is not None:
            return GtrParams.from_omega(k, delta, self.omega, phase)
        return GtrParams(k=k, delta=delta, sigma_sq=self.sigma_sq, phase=phase)


class SweepSpec(_Strict):
    param: str
    values: List[float] = Field(min_length=1)


class SimSpec(_Strict):
    realizations: int = 50_000
    region_radius_factor: float = 15.0
    seed: int = 0
    hybrid_nearest: Optional[int] = None

    def resolve(self):
        return SimConfig(
            realizations=self.realizations,
            region_radius_factor=self.region_radius_factor,
            seed=self.seed,
            hybrid_nearest=self.hybrid_nearest,
        )


class OutputSpec(_Strict):
    dir: str = "."
    name: str = "run"
    format: Literal[FORMATS] = "csv"


class RunConfig(_Strict):
    network: NetworkSpec = NetworkSpec()
    desired: FadingSpec = FadingSpec(model="rayleigh", sigma_sq=1.0)
    interferer: FadingSpec = FadingSpec(model="gtr_u", k=5.0, delta=1.0, sigma_sq=1.0)
    method: Literal[RUN_METHODS] = "exact"
    sweep: Optional[SweepSpec] = None
    sim: SimSpec = SimSpec()
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _check(self):
        severe = self.interferer.model.startswith("severe")
        if self.desired.model.startswith("severe"):
            raise ValueError("desired: the serving link needs a diffuse part; severe models are interferer-only")
        if self.method == "severe" and not severe:
            raise ValueError("method 'severe' needs a severe_* interferer model")
        if self.method in ("exact", "lower_bound") and severe:
            raise ValueError(f"method {self.method!r} needs a finite-k interferer model")
        if self.sweep is not None:
            section, _, field = self.sweep.param.partition(".")
            if section not in ("network", "desired", "interferer", "sim") or not field:
                raise ValueError(f"sweep.param {self.sweep.param!r} must be section.field")
            model = getattr(self, section)
            info = type(model).model_fields.get(field)
            if info is None or field == "model" or info.annotation not in (
                    float, int, Optional[float], Optional[int]):
                raise ValueError(f"sweep.param {self.sweep.param!r} is not a numeric field")
        return self

    def link(self):
        return LinkConfig(desired=self.desired.resolve(), interferer=self.interferer.resolve())

    def with_value(self, path, value):
        """Copy with the dotted field ``path`` set to ``value``."""
        raw = self.model_dump()
        _set_path(raw, path, value)
        return validate(raw)

    def points(self):
        """``(value, RunConfig)`` per sweep point, or ``[(None, self)]``."""
        if self.sweep is None:
            return [(None, self)]
        return [(v, self.with_value(self.sweep.param, v)) for v in self.sweep.values]

    def resolved(self):
        """Plain dict of the SI-unit quantities used by the core."""
        net = self.network.resolve()
        out = {
            "network": {"lam_per_m2": net.lam, "power_w": net.power, "eta": net.eta, "noise_w": net.noise},
            "desired": _params_dict(self.desired.resolve()),
            "interferer": _params_dict(self.interferer.resolve()),
            "method": self.method,
            "sim": self.sim.model_dump(),
            "output": self.output.model_dump(),
        }
        if self.sweep is not None:
            out["sweep"] = self.sweep.model_dump()
        return out


def _params_dict(params):
    phase = params.phase
    if isinstance(phase, Truncated):
        ph = {"law": "truncated", "p": phase.p}
    elif isinstance(phase, VonMises):
        ph = {"law": "von_mises", "concentration": phase.concentration}
    else:
        ph = {"law": "uniform"}
    if isinstance(params, SevereParams):
        return {"omega": params.omega, "delta": params.delta, "phase": ph}
    return {"k": params.k, "delta": params.delta, "sigma_sq": params.sigma_sq,
            "omega": params.omega, "phase": ph}


def _set_path(raw, path, value):
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {} if node.get(key) is None else node[key]
            if not isinstance(node[key], dict):
                raise ConfigError(f"{path}: {key!r} is not a section")
        node = node[key]
    node[keys[-1]] = value


def _describe(err):
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"])
        parts.append(f"{loc}: {e['msg']}" if loc else e["msg"])
    return "; ".join(parts)


def validate(raw):
    """Validate a raw mapping into a :class:`RunConfig`; raises ConfigError."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    try:
        cfg = RunConfig.model_validate(raw)
        # build the core objects once so domain errors surface here
        cfg.network.resolve()
        cfg.link()
        cfg.sim.resolve()
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    for value in (cfg.sweep.values if cfg.sweep else []):
        if not math.isfinite(value):
            raise ConfigError("sweep.values must be finite")
    return cfg


def parse_override(item):
    """``"a.b=value"`` to ``("a.b", value)`` with the value read as YAML."""
    path, sep, text = item.partition("=")
    if not sep or not path:
        raise ConfigError(f"--set expects path=value, got {item!r}")
    try:
        return path.strip(), yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"--set {path}: {exc}") from None


def load(path=None, overrides=(), base=None):
    """Read a YAML file (or start from ``base``), apply overrides, validate."""
    raw = copy.deepcopy(base) if base is not None else {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    for item in overrides:
        key, value = parse_override(item)
        _set_path(raw, key, value)
    return validate(raw)
