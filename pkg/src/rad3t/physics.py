"""Physical parameters, constitutive laws, and source models of the 3T system.

All coefficients of the nondimensionalized model live here: the scale ratio
epsilon, light speed c, radiation constant a, the electron-ion coupling
coefficient kappa, heat capacities C_ve / C_vi, conduction coefficients
K_e / K_i, and the opacity sigma(x, T_e).  Every temperature-dependent
coefficient is a power law  base * multiplier(x) * T**exponent, which covers
all built-in benchmarks (constant values, sigma0/T^2, 300*T^-3, 0.01379/sqrt(T),
0.1*rho_bar*T).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class CoefficientModel:
    """Power-law coefficient  base * multiplier(x) * T**exponent.

    ``spatial_table`` is an optional piecewise-constant-in-x multiplier given
    as (edges, values): values[i] applies on [edges[i], edges[i+1]).
    """

    base: float
    exponent: float = 0.0
    spatial_table: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.base <= 0.0:
            raise ConfigurationError(f"coefficient base must be > 0, got {self.base}")
        if self.spatial_table is not None:
            edges, values = self.spatial_table
            if len(edges) != len(values) + 1:
                raise ConfigurationError("spatial_table needs len(edges) == len(values) + 1")
            if any(v <= 0.0 for v in values):
                raise ConfigurationError("spatial_table multipliers must be > 0")

    @property
    def is_constant(self) -> bool:
        return self.exponent == 0.0 and self.spatial_table is None

    def multiplier(self, x):
        if self.spatial_table is None:
            return np.ones_like(np.asarray(x, dtype=float))
        edges, values = self.spatial_table
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(values) - 1)
        return np.asarray(values)[idx]

    def __call__(self, x, T):
        if self.exponent == 0.0:
            T_pow = 1.0
        else:
            T_pow = np.power(T, self.exponent)
        if self.spatial_table is None:
            return self.base * T_pow * np.ones_like(np.asarray(T, dtype=float))
        return self.base * self.multiplier(x) * T_pow


def constant_model(value: float) -> CoefficientModel:
    return CoefficientModel(base=value, exponent=0.0)


@dataclass(frozen=True)
class PhysicalParams:
    """All model coefficients of the nondimensionalized 3T system."""

    epsilon: float = 1.0
    c: float = 1.0
    a: float = 1.0
    kappa_model: CoefficientModel = field(default_factory=lambda: constant_model(1.0))
    C_ve_model: CoefficientModel = field(default_factory=lambda: constant_model(1.0))
    C_vi_model: CoefficientModel = field(default_factory=lambda: constant_model(1.0))
    K_e: float = 0.0
    K_i: float = 0.0
    opacity_model: CoefficientModel = field(default_factory=lambda: constant_model(1.0))

    def __post_init__(self):
        for name in ("epsilon", "c", "a"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.K_e < 0.0 or self.K_i < 0.0:
            raise ConfigurationError("conduction coefficients K_e, K_i must be >= 0")


@dataclass(frozen=True)
class SourceSpec:
    """Gaussian pulse source  rho_bar*C/(sqrt(2 pi)*t_w) * exp(sign*(t-t_c)^2/(2 t_w^2)).

    ``target`` selects which equation is driven: radiation, electron, or ion.
    ``exponent_sign`` defaults to the decaying pulse (-1); +1 is representable
    but diverges and exists only to make the sign choice explicit.
    """

    target: str
    amplitude: float
    t_w: float = 1.0
    t_c: float = 1.0
    rho_bar: float = 1.0
    exponent_sign: float = -1.0

    def __post_init__(self):
        if self.target not in ("radiation", "electron", "ion"):
            raise ConfigurationError(f"unknown source target {self.target!r}")
        if self.t_w <= 0.0:
            raise ConfigurationError("source width t_w must be > 0")


def opacity(x, T_e, model: CoefficientModel):
    """Opacity sigma(x, T_e); strictly positive, domain error for T_e <= 0."""
    if np.any(np.asarray(T_e) <= 0.0):
        raise ValueError("opacity requires T_e > 0")
    return model(x, T_e)


def conduction_coeff(species: str, T, params: PhysicalParams):
    """Thermal diffusion coefficient D_s = K_s * T**(5/2) for s in {e, i}."""
    if np.any(np.asarray(T) <= 0.0):
        raise ValueError("conduction coefficient requires T > 0")
    K = {"e": params.K_e, "i": params.K_i}[species]
    return K * np.power(T, 2.5)


def radiation_temperature(rho, params: PhysicalParams):
    """Invert E_r = a*T_r^4 with E_r = 2*rho/c (slab geometry, psi_0 = 2*rho)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0):
        raise ValueError("radiation temperature requires rho >= 0")
    return np.power(2.0 * rho / (params.a * params.c), 0.25)


def radiation_density(T_r, params: PhysicalParams):
    """rho such that radiation_temperature(rho) == T_r, i.e. a*c*T_r^4 / 2."""
    return 0.5 * params.a * params.c * np.power(np.asarray(T_r, dtype=float), 4)


def source_value(spec: SourceSpec, t):
    """Evaluate the pulse at time t; peak value at t = t_c."""
    t = np.asarray(t, dtype=float)
    arg = spec.exponent_sign * (t - spec.t_c) ** 2 / (2.0 * spec.t_w**2)
    return spec.rho_bar * spec.amplitude / (math.sqrt(2.0 * math.pi) * spec.t_w) * np.exp(arg)


def source_rates(sources, t):
    """Sum source values per target at time t; returns (Q_r, Q_e, Q_i)."""
    q = {"radiation": 0.0, "electron": 0.0, "ion": 0.0}
    for spec in sources:
        q[spec.target] += float(source_value(spec, t))
    return q["radiation"], q["electron"], q["ion"]
