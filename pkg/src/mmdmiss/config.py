"""Experiment configuration: JSON file schema, validation, construction.

The schema is documented in the README. Unknown keys anywhere in the file
are errors, so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .mechanisms import (
    AdversarialMechanism,
    DataContamination,
    HuberMixtureMechanism,
    McarMechanism,
    Mechanism,
    TruncationMechanism,
    blockwise_mcar,
    self_censoring_blockwise,
)

ESTIMATOR_ALIASES = {
    "mmd": "mmd",
    "mle": "mle",
    "ignoring_mle_gaussian": "mle",
    "median": "median",
    "coordinate_median": "median",
    "extremes": "extremes",
    "average_of_extremes": "extremes",
}


@dataclass(frozen=True)
class SgdSettings:
    """SGD template shared by every replicate; the seed is derived per
    replicate by the harness."""

    steps: int = 2000
    samples: int = 50
    schedule: str = "inverse_sqrt"
    step_size: float | None = None
    averaging: bool = True


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    contamination: DataContamination


@dataclass(frozen=True)
class MechanismSettings:
    kind: str
    epsilon: float = 0.0
    alphas: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    alpha: float = 0.5
    lower: float = -np.inf
    upper: float = np.inf
    budget: str = "figure1"


@dataclass
class ExperimentConfig:
    n: int
    d: int
    theta_star: np.ndarray
    mechanism: MechanismSettings
    scenarios: list[ScenarioSpec]
    estimators: list[str]
    replications: int
    seed: int
    sgd: SgdSettings = field(default_factory=SgdSettings)
    bandwidth: str | float = "median"
    box_radius: float = 100.0

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.scenarios:
            raise ConfigError("need at least one scenario")
        if not self.estimators:
            raise ConfigError("need at least one estimator")
        self.theta_star = _as_vector(self.theta_star, self.d, "theta_star")

    def build_mechanism(self, scenario: ScenarioSpec) -> Mechanism:
        """Mechanisms whose conditional law depends on the data law (the
        self-censoring score cdf) are rebuilt per scenario."""
        m = self.mechanism
        if m.kind == "none":
            return McarMechanism({(0,) * self.d: 1.0})
        if m.kind == "blockwise_mcar":
            return blockwise_mcar(m.alphas, self.d)
        if m.kind == "blockwise_huber_selfcensoring":
            base = blockwise_mcar(m.alphas, self.d)
            if m.epsilon == 0.0:
                return base
            contaminant = self_censoring_blockwise(
                scenario.contamination, self.theta_star, self.d
            )
            return HuberMixtureMechanism(base, contaminant, m.epsilon)
        if m.kind == "mcar":
            if self.d != 1:
                raise ConfigError("the 'mcar' kind is the univariate on/off law")
            return McarMechanism({(0,): m.alpha, (1,): 1.0 - m.alpha})
        if m.kind == "truncation":
            return TruncationMechanism(m.lower, m.upper)
        if m.kind == "huber_truncation":
            base = McarMechanism({(0,): m.alpha, (1,): 1.0 - m.alpha})
            if m.epsilon == 0.0:
                return base
            return HuberMixtureMechanism(
                base, TruncationMechanism(m.lower, m.upper), m.epsilon
            )
        if m.kind == "adversarial":
            return AdversarialMechanism(m.alpha, m.epsilon, m.budget)
        raise ConfigError(f"unknown mechanism kind {m.kind!r}")


def _as_vector(value, d: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).ravel()
    if arr.size == 1:
        return np.full(d, float(arr[0]))
    if arr.size != d:
        raise ConfigError(f"{name} must be a scalar or length-{d} list")
    return arr


class _Section:
    """Dict wrapper that tracks consumed keys and rejects leftovers."""

    def __init__(self, raw: dict, where: str):
        if not isinstance(raw, dict):
            raise ConfigError(f"{where} must be an object")
        self.raw = dict(raw)
        self.where = where

    def take(self, key, default=..., kind=None):
        if key in self.raw:
            value = self.raw.pop(key)
        elif default is not ...:
            value = default
        else:
            raise ConfigError(f"missing required key {key!r} in {self.where}")
        if kind is not None and value is not None and not isinstance(value, kind):
            raise ConfigError(
                f"{self.where}.{key} has wrong type {type(value).__name__}"
            )
        return value

    def close(self):
        if self.raw:
            raise ConfigError(
                f"unknown key(s) in {self.where}: {sorted(self.raw)}"
            )


def _parse_contamination(raw: dict, d: int, where: str) -> DataContamination:
    sec = _Section(raw, where)
    kind = sec.take("kind", kind=str)
    if kind == "none":
        sec.close()
        return DataContamination.none()
    epsilon = float(sec.take("epsilon"))
    shift = sec.take("shift")
    sec.close()
    param = _as_vector(shift, d, f"{where}.shift")
    if kind == "gaussian_mean":
        return DataContamination.gaussian_mean(epsilon, param)
    if kind == "point_mass":
        return DataContamination.point_mass(epsilon, param)
    raise ConfigError(f"unknown contamination kind {kind!r} in {where}")


def _parse_mechanism(raw: dict, where: str) -> MechanismSettings:
    sec = _Section(raw, where)
    kind = sec.take("kind", kind=str)
    settings = dict(kind=kind)
    if kind in ("blockwise_mcar", "blockwise_huber_selfcensoring"):
        settings["alphas"] = tuple(float(a) for a in sec.take("alphas", [0.25] * 4))
    if kind in ("blockwise_huber_selfcensoring", "huber_truncation", "adversarial"):
        settings["epsilon"] = float(sec.take("epsilon"))
    if kind in ("mcar", "huber_truncation", "adversarial"):
        settings["alpha"] = float(sec.take("alpha"))
    if kind in ("truncation", "huber_truncation"):
        settings["lower"] = float(sec.take("lower", -np.inf))
        settings["upper"] = float(sec.take("upper", np.inf))
    if kind == "adversarial":
        settings["budget"] = sec.take("budget", "figure1", kind=str)
    sec.close()
    return MechanismSettings(**settings)


def _parse_sgd(raw: dict, where: str) -> SgdSettings:
    sec = _Section(raw, where)
    settings = SgdSettings(
        steps=int(sec.take("steps", 2000)),
        samples=int(sec.take("samples", 50)),
        schedule=sec.take("schedule", "inverse_sqrt", kind=str),
        step_size=(
            None
            if (raw_step := sec.take("step_size", None)) is None
            else float(raw_step)
        ),
        averaging=bool(sec.take("averaging", True)),
    )
    sec.close()
    return settings


def parse_config(raw: dict) -> ExperimentConfig:
    sec = _Section(raw, "config")
    d = int(sec.take("d"))
    n = int(sec.take("n"))
    theta_star = _as_vector(sec.take("theta_star", 0.0), d, "theta_star")
    seed = int(sec.take("seed"))
    replications = int(sec.take("replications", 200))
    estimators = sec.take("estimators", ["mmd", "mle", "median"], kind=list)
    estimators = [_resolve_estimator(e) for e in estimators]
    bandwidth = sec.take("bandwidth", "median")
    if isinstance(bandwidth, str):
        if bandwidth != "median":
            raise ConfigError("bandwidth must be 'median' or a positive number")
    else:
        bandwidth = float(bandwidth)
    sgd = _parse_sgd(sec.take("sgd", {}), "sgd")
    box_radius = float(sec.take("box_radius", 100.0))
    mechanism = _parse_mechanism(sec.take("mechanism"), "mechanism")
    scenarios_raw = sec.take("scenarios", kind=list)
    sec.close()
    scenarios = []
    for i, sraw in enumerate(scenarios_raw):
        ssec = _Section(sraw, f"scenarios[{i}]")
        name = ssec.take("name", kind=str)
        cont = _parse_contamination(
            ssec.take("contamination"), d, f"scenarios[{i}].contamination"
        )
        ssec.close()
        scenarios.append(ScenarioSpec(name=name, contamination=cont))
    return ExperimentConfig(
        n=n,
        d=d,
        theta_star=theta_star,
        mechanism=mechanism,
        scenarios=scenarios,
        estimators=estimators,
        replications=replications,
        seed=seed,
        sgd=sgd,
        bandwidth=bandwidth,
        box_radius=box_radius,
    )


def _resolve_estimator(name) -> str:
    if not isinstance(name, str) or name not in ESTIMATOR_ALIASES:
        raise ConfigError(
            f"unknown estimator {name!r}; choose from {sorted(set(ESTIMATOR_ALIASES))}"
        )
    return ESTIMATOR_ALIASES[name]


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(raw)
