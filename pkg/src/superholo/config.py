"""JSON run configuration for the command-line workflows.

Frequencies are entered in MHz as ordinary frequencies. With
``"two_pi": true`` (the default) they are multiplied by 2*pi internally,
so ``"omega_max_mhz": 750`` means ``2*pi x 750 MHz``. Unknown keys are
rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import IntegratorConfig
from .errors import ConfigurationError
from .gates import GateProtocol
from .pulses import DEFAULT_MSA_F0, DressingConfig, DressingMode

GATES = ("not", "hadamard", "single_qubit", "cp")
MHZ = 1e6


@dataclass(frozen=True)
class IntegratorSettings:
    dt: Optional[float] = None
    samples: int = 400
    max_phase: float = 0.01
    explicit_keys: frozenset = field(default=frozenset(), compare=False, repr=False)

    def to_dict(self, full: bool = False) -> dict:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name != "explicit_keys" and (full or f.name in self.explicit_keys)
        }

    def build(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(dt=self.dt, samples=self.samples, max_phase=self.max_phase)
        except ValueError as exc:
            raise ConfigurationError(f"integrator: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration.

    ``kappa_mhz`` and ``gamma2_mhz`` left as null take gate-dependent
    defaults: 0 and 2.6 for single-qubit gates, 3.5 and 0 for the CP gate.
    ``varphi`` and ``gamma`` (radians) are read only for
    ``gate="single_qubit"``.
    """

    gate: str = "not"
    mode: str = "satd"
    varphi: float = float(np.pi / 4)
    gamma: float = float(np.pi)
    two_pi: bool = True
    omega_max_mhz: float = 750.0
    lambda_c_mhz: float = 750.0
    omega_r_mhz: Optional[float] = None
    delta_mhz: float = 4000.0
    kappa_mhz: Optional[float] = None
    gamma1_mhz: float = 2.6
    gamma2_mhz: Optional[float] = None
    tau_s: Optional[float] = None
    t_over_tau: float = 10.0
    msa_f0: float = DEFAULT_MSA_F0
    coupling_divisor: int = 1
    atomic_decay_scale: Optional[float] = None
    open_system: bool = True
    pulse_samples: int = 1000
    time_multipliers: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0, 4.0)
    decay_multipliers: tuple[float, ...] = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    explicit_keys: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        if self.gate not in GATES:
            raise ConfigurationError(f"gate must be one of {GATES}, got {self.gate!r}")
        try:
            DressingMode(self.mode)
        except ValueError:
            raise ConfigurationError(f"unknown dressing mode {self.mode!r}") from None
        if self.msa_f0 <= 0:
            raise ConfigurationError("msa_f0 must be positive")
        if self.pulse_samples < 2:
            raise ConfigurationError("pulse_samples must be at least 2")
        object.__setattr__(self, "time_multipliers", tuple(float(m) for m in self.time_multipliers))
        object.__setattr__(self, "decay_multipliers", tuple(float(m) for m in self.decay_multipliers))

    def angular(self, mhz: float) -> float:
        return mhz * MHZ * (2 * np.pi if self.two_pi else 1.0)

    @property
    def is_cp(self) -> bool:
        return self.gate == "cp"

    def dressing(self, mode: Optional[str] = None) -> DressingConfig:
        mode = DressingMode(mode or self.mode)
        if mode is DressingMode.MSA:
            return DressingConfig.msa(self.msa_f0)
        return DressingConfig(mode)

    def protocol(self, mode: Optional[str] = None) -> GateProtocol:
        kappa = self.kappa_mhz if self.kappa_mhz is not None else (3.5 if self.is_cp else 0.0)
        gamma2 = self.gamma2_mhz if self.gamma2_mhz is not None else (0.0 if self.is_cp else 2.6)
        lam = self.angular(self.lambda_c_mhz)
        common = dict(
            dressing=self.dressing(mode),
            tau=self.tau_s,
            t_over_tau=self.t_over_tau,
            omega_max=self.angular(self.omega_max_mhz),
            kappa=self.angular(kappa),
            gamma1=self.angular(self.gamma1_mhz),
            gamma2=self.angular(gamma2),
            lambda_c=lam,
            omega_r=lam if self.omega_r_mhz is None else self.angular(self.omega_r_mhz),
            delta=self.angular(self.delta_mhz),
            coupling_divisor=self.coupling_divisor,
            atomic_decay_scale=self.atomic_decay_scale,
        )
        if self.gate == "not":
            return GateProtocol.not_gate(**common)
        if self.gate == "hadamard":
            return GateProtocol.hadamard(**common)
        if self.gate == "single_qubit":
            return GateProtocol.single_qubit(self.varphi, self.gamma, **common)
        return GateProtocol.controlled_phase(**common)

    def to_dict(self, full: bool = False) -> dict:
        """Plain JSON-ready dict: only the keys that were given, unless ``full``."""
        out = {}
        for f in fields(self):
            if f.name == "explicit_keys":
                continue
            if not full and f.name not in self.explicit_keys:
                continue
            value = getattr(self, f.name)
            if isinstance(value, IntegratorSettings):
                value = value.to_dict(full)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    def to_json(self, full: bool = False) -> str:
        return json.dumps(self.to_dict(full), indent=2, sort_keys=True)

    def with_overrides(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, explicit_keys=self.explicit_keys | frozenset(changes), **changes)


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("configuration must be a JSON object")
    allowed = _field_names(RunConfig) - {"explicit_keys"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
    kwargs = dict(doc)
    if "integrator" in kwargs:
        sub = kwargs["integrator"]
        if not isinstance(sub, dict):
            raise ConfigurationError("integrator must be an object")
        bad = sorted(set(sub) - (_field_names(IntegratorSettings) - {"explicit_keys"}))
        if bad:
            raise ConfigurationError(f"unknown integrator keys: {', '.join(bad)}")
        kwargs["integrator"] = IntegratorSettings(explicit_keys=frozenset(sub), **sub)
    for key in ("time_multipliers", "decay_multipliers"):
        if key in kwargs:
            if not isinstance(kwargs[key], list):
                raise ConfigurationError(f"{key} must be a list")
            kwargs[key] = tuple(kwargs[key])
    try:
        return RunConfig(explicit_keys=frozenset(doc), **kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(doc)


def default_config() -> RunConfig:
    return RunConfig()

