"""Analytic I2C data-line model with a DCP as programmable pull-up.

Conventions (SI units throughout):

* the pull-up branch is the DCP resistance in parallel with the devices'
  equivalent internal pull-up ``r_ipu`` (``inf`` when absent);
* logic 1 settles at the divider ``v_supply * r_off / (r_off + r_pu_eq)``,
  logic 0 at ``v_supply * r_on / (r_on + r_pu_eq)``;
* a rising edge charges the bus through ``r_off || r_pu_eq``; a 10-90 %
  rise time spans ``ln 9`` time constants;
* bytes go out most significant bit first and only 1 -> 0 errors occur.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .distributions import WordDependentChannel
from .exceptions import EstimationError, InconsistentMeasurementsError, ValidationError

LN9 = math.log(9.0)
BYTE = 8


def parallel(*resistances: float) -> float:
    """Parallel combination; ``inf`` branches drop out, any zero short-circuits."""
    conductance = 0.0
    for r in resistances:
        if r == 0:
            return 0.0
        if not math.isinf(r):
            conductance += 1.0 / r
    return math.inf if conductance == 0 else 1.0 / conductance


def dcp_table(total_ohms: float, taps: int = 256) -> dict[int, float]:
    """Uniform-step DCP: setting ``i`` gives ``i * total / (taps - 1)`` ohms."""
    step = total_ohms / (taps - 1)
    return {i: i * step for i in range(taps)}


DCP_PRESETS: dict[str, dict[int, float]] = {
    "ISL23415TFUZ": dcp_table(100e3),   # 100 kOhm, ~0.39 kOhm per tap
    "ISL23415WFUZ": dcp_table(10e3),    # 10 kOhm, ~39 Ohm per tap
}


@dataclass(frozen=True)
class CircuitParams:
    v_supply: float = 2.5
    v_th: float | None = None           # defaults to v_supply / 2
    r_ipu: float = math.inf
    r_off: float = 3.94e3
    r_on: float = 15.0
    c_bus: float = 100e-12
    sigma_n: float = 20e-3
    t_clk: float = 5e-6                 # 200 kHz
    dcp_table: Mapping[int, float] = field(default_factory=lambda: DCP_PRESETS["ISL23415TFUZ"])

    def __post_init__(self):
        if self.v_th is None:
            object.__setattr__(self, "v_th", self.v_supply / 2.0)
        object.__setattr__(self, "dcp_table", {int(k): float(v) for k, v in self.dcp_table.items()})
        if not 0 < self.v_th < self.v_supply:
            raise ValidationError("need 0 < v_th < v_supply")
        if not self.r_ipu > 0 or not self.r_off > 0 or math.isinf(self.r_off):
            raise ValidationError("r_ipu and r_off must be positive (r_ipu may be inf)")
        if self.r_on < 0:
            raise ValidationError("r_on must be non-negative")
        if not self.c_bus > 0 or not self.sigma_n > 0 or not self.t_clk > 0:
            raise ValidationError("c_bus, sigma_n and t_clk must be positive")
        if any(v < 0 for v in self.dcp_table.values()):
            raise ValidationError("DCP resistances must be non-negative")

    def r_dcp(self, setting: int) -> float:
        try:
            return self.dcp_table[int(setting)]
        except KeyError:
            raise ValidationError(f"DCP setting {setting} not in table") from None

    def r_pu_eq(self, setting: int) -> float:
        return parallel(self.r_ipu, self.r_dcp(setting))

    def tau(self, setting: int) -> float:
        """Rise time constant ``(r_off || r_pu_eq) * c_bus``."""
        return parallel(self.r_off, self.r_pu_eq(setting)) * self.c_bus

    def replace(self, **changes) -> "CircuitParams":
        data = {**self.__dict__, **changes}
        if "v_supply" in changes and "v_th" not in changes:
            data["v_th"] = None
        return CircuitParams(**data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["r_ipu"] = None if math.isinf(self.r_ipu) else self.r_ipu
        data["dcp_table"] = {str(k): v for k, v in sorted(self.dcp_table.items())}
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitParams":
        data = dict(data)
        if "preset" in data:
            base = PARAM_PRESETS[data.pop("preset")]
            return base.replace(**{k: v for k, v in cls._decode(data).items()})
        return cls(**cls._decode(data))

    @staticmethod
    def _decode(data: dict) -> dict:
        out = dict(data)
        if "r_ipu" in out and out["r_ipu"] is None:
            out["r_ipu"] = math.inf
        if isinstance(out.get("dcp_table"), str):
            out["dcp_table"] = DCP_PRESETS[out["dcp_table"]]
        elif "dcp_table" in out:
            out["dcp_table"] = {int(k): float(v) for k, v in out["dcp_table"].items()}
        return out


@dataclass(frozen=True)
class DcpProfile:
    """DCP settings for the 8 data bits in transmission order, plus the nominal one."""

    settings: tuple[int, ...]
    nominal: int

    def __post_init__(self):
        settings = tuple(int(s) for s in self.settings)
        if len(settings) != BYTE:
            raise ValidationError("a byte profile needs 8 settings")
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "nominal", int(self.nominal))

    @classmethod
    def fixed(cls, setting: int, nominal: int | None = None) -> "DcpProfile":
        return cls((setting,) * BYTE, setting if nominal is None else nominal)

    def validate(self, params: CircuitParams) -> "DcpProfile":
        for s in self.settings + (self.nominal,):
            params.r_dcp(s)
        return self

    def to_dict(self) -> dict:
        return {"settings": list(self.settings), "nominal": self.nominal}

    @classmethod
    def from_dict(cls, data: dict) -> "DcpProfile":
        return cls(tuple(data["settings"]), data["nominal"])


@dataclass(frozen=True)
class BenchMeasurements:
    v1_min: float
    v1_max: float
    r_dcp_min: float
    r_dcp_max: float
    v0_min: float | None = None
    v0_max: float | None = None
    rise_min: float | None = None
    rise_max: float | None = None
    fall_min: float | None = None
    fall_max: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchMeasurements":
        return cls(**data)


# Steady logic-1 levels, DCP endpoints and rise times measured on the
# reference platform at a 2.5 V supply.
REFERENCE_MEASUREMENTS = BenchMeasurements(
    v1_min=2.1316, v1_max=2.0723, r_dcp_min=3.92e3, r_dcp_max=62.75e3,
    v0_min=58.9e-3, v0_max=25.2e-3, rise_min=454e-9, rise_max=1092e-9,
    fall_min=18e-9, fall_max=17e-9)

PARAM_PRESETS: dict[str, CircuitParams] = {
    # estimated platform values; bus capacitance from the ln 9 rise convention
    "bench": CircuitParams(r_ipu=0.82e3, r_off=3.94e3, c_bus=357e-12, sigma_n=19.1e-3),
    # analysis settings: 100 pF bus, no internal pull-up, 20 mV noise
    "coarse": CircuitParams(dcp_table=DCP_PRESETS["ISL23415TFUZ"]),
    "fine": CircuitParams(dcp_table=DCP_PRESETS["ISL23415WFUZ"]),
    "fine-noisy": CircuitParams(dcp_table=DCP_PRESETS["ISL23415WFUZ"], sigma_n=40e-3),
}

SWEEP_PRESETS: dict[str, tuple[int, ...]] = {
    "coarse": (8, 9, 10, 11, 12),
    "fine": (96, 97, 98, 99, 100),
    "fine-noisy": (96, 97, 98, 99, 100),
}


def measurement_ratio(m: BenchMeasurements, v_supply: float) -> float:
    """``r_pu_eq(max) / r_pu_eq(min)`` implied by the two logic-1 dividers."""
    for v in (m.v1_min, m.v1_max):
        if not 0 < v < v_supply:
            raise ValidationError("logic-1 levels must lie strictly between 0 and v_supply")
    return ((v_supply - m.v1_max) / m.v1_max) * (m.v1_min / (v_supply - m.v1_min))


def estimate_resistances(m: BenchMeasurements, v_supply: float,
                         bracket: tuple[float, float] = (1e-9, 1e7)) -> tuple[float, float]:
    """Recover ``(r_ipu, r_off)`` from the logic-1 levels at both DCP endpoints.

    The ratio of the two divider equations eliminates ``r_off`` and leaves a
    monotone equation in ``r_ipu``, solved by bracketed root finding.
    """
    if m.v1_min == m.v1_max:
        raise InconsistentMeasurementsError("identical logic-1 levels carry no information")
    ratio = measurement_ratio(m, v_supply)
    if m.r_dcp_max > m.r_dcp_min and ratio <= 1.0:
        raise InconsistentMeasurementsError(
            f"ratio {ratio:.4f} <= 1 although the maximum DCP setting is larger")
    if ratio >= m.r_dcp_max / m.r_dcp_min:
        raise EstimationError("ratio reaches the no-internal-pull-up limit; r_ipu unbounded")

    def residual(r_ipu: float) -> float:
        return parallel(r_ipu, m.r_dcp_max) / parallel(r_ipu, m.r_dcp_min) - ratio

    lo, hi = bracket
    try:
        r_ipu = brentq(residual, lo, hi, xtol=1e-9, rtol=1e-14, maxiter=500)
    except ValueError as exc:
        raise EstimationError(f"no internal pull-up resistance in [{lo}, {hi}] ohm") from exc
    r_pu_min = parallel(r_ipu, m.r_dcp_min)
    r_off = r_pu_min * m.v1_min / (v_supply - m.v1_min)
    return r_ipu, r_off


def estimate_capacitance(rise_time: float, params: CircuitParams, setting: int) -> float:
    """Bus capacitance from a 10-90 % rise time: ``t / (ln 9 * (r_off || r_pu_eq))``."""
    if not rise_time > 0:
        raise ValidationError("rise time must be positive")
    return rise_time / (LN9 * parallel(params.r_off, params.r_pu_eq(setting)))


def steady_state_levels(params: CircuitParams, setting: int) -> tuple[float, float]:
    """Steady ``(v0, v1)`` bus voltages at a DCP setting."""
    r_pu = params.r_pu_eq(setting)
    if math.isinf(r_pu):
        return 0.0, params.v_supply
    v1 = params.v_supply * params.r_off / (params.r_off + r_pu)
    v0 = 0.0 if params.r_on == 0 else params.v_supply * params.r_on / (params.r_on + r_pu)
    return v0, v1


def sampled_voltages(x: int, profile: DcpProfile, params: CircuitParams) -> list[float]:
    """End-of-cycle bus voltage for each of the 8 bits, in transmission order."""
    if not 0 <= int(x) < 1 << BYTE:
        raise ValidationError("byte value outside [0, 255]")
    profile.validate(params)
    voltage = steady_state_levels(params, profile.nominal)[0]
    out = []
    for j, setting in enumerate(profile.settings):
        bit = (int(x) >> (BYTE - 1 - j)) & 1
        v0, v1 = steady_state_levels(params, setting)
        if bit == 0:
            voltage = v0
        else:
            tau = params.tau(setting)
            decay = 0.0 if tau == 0 else math.exp(-params.t_clk / tau)
            voltage = voltage * decay + v1 * (1.0 - decay)
        out.append(voltage)
    return out


def one_error_probability(voltage: float, params: CircuitParams) -> float:
    """Chance that Gaussian noise drags a sampled logic 1 to or below ``v_th``."""
    return float(np.clip(ndtr((params.v_th - voltage) / params.sigma_n), 0.0, 1.0))


def byte_error_profile(x: int, profile: DcpProfile, params: CircuitParams) -> np.ndarray:
    """``p_down[i]`` for bit ``i`` of byte ``x`` (LSB = index 0); zero on 0-bits."""
    voltages = sampled_voltages(x, profile, params)
    p_down = np.zeros(BYTE)
    for j, v in enumerate(voltages):
        i = BYTE - 1 - j
        if (int(x) >> i) & 1:
            p_down[i] = one_error_probability(v, params)
    return p_down


def channel_from_profile(profile: DcpProfile, params: CircuitParams) -> WordDependentChannel:
    """Tabulate the byte-dependent 1 -> 0 probabilities for all 256 bytes."""
    down = np.array([byte_error_profile(x, profile, params) for x in range(1 << BYTE)])
    return WordDependentChannel(down, np.zeros_like(down))


def power_estimate(params: CircuitParams, setting: int, duty0: float, f_switch: float) -> float:
    """First-order I2C power: conduction while low plus ``C V**2 f`` switching.

    A trend model, not a calibrated one: conduction is
    ``duty0 * v_supply * (v_supply - v0) / r_pu_eq``.
    """
    if not 0 <= duty0 <= 1:
        raise ValidationError("duty0 must lie in [0, 1]")
    if f_switch < 0:
        raise ValidationError("f_switch must be non-negative")
    r_pu = params.r_pu_eq(setting)
    v0, _ = steady_state_levels(params, setting)
    conduction = 0.0 if duty0 == 0 else duty0 * params.v_supply * (params.v_supply - v0) / r_pu
    return conduction + f_switch * params.c_bus * params.v_supply ** 2


def dumps(obj) -> str:
    return json.dumps(obj.to_dict(), sort_keys=True)


__all__: Sequence[str] = [
    "BenchMeasurements", "CircuitParams", "DCP_PRESETS", "DcpProfile", "PARAM_PRESETS",
    "REFERENCE_MEASUREMENTS", "SWEEP_PRESETS", "byte_error_profile", "channel_from_profile",
    "dcp_table", "estimate_capacitance", "estimate_resistances", "measurement_ratio",
    "one_error_probability", "parallel", "power_estimate", "sampled_voltages",
    "steady_state_levels",
]
