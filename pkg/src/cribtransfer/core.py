"""Shared domain types and deterministic numeric utilities.

Unit conventions: the qubit-cavity coupling G sets the frequency unit and
1/G the time unit for the transfer stage.  All detunings are measured from
the qubit frequency (rotating frame fixed at the qubit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DETUNING_PROFILES = ("uniform-grid", "uniform-random", "lorentzian")


class ConfigError(ValueError):
    """Bad user input (rejected before any numerics run)."""


@dataclass(frozen=True)
class SingleExcitationState:
    """One excitation shared between N spins, a cavity mode and a qubit."""

    spin_amps: np.ndarray  # complex, length N
    cavity_amp: complex
    qubit_amp: complex

    def __post_init__(self):
        amps = np.asarray(self.spin_amps, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ConfigError("spin_amps must be a non-empty 1-d vector")
        object.__setattr__(self, "spin_amps", amps)

    @property
    def n_spins(self) -> int:
        return self.spin_amps.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.spin_amps, [complex(self.cavity_amp)], [complex(self.qubit_amp)]]
        )

    @staticmethod
    def from_vector(y: np.ndarray) -> "SingleExcitationState":
        y = np.asarray(y, dtype=complex)
        return SingleExcitationState(y[:-2], complex(y[-2]), complex(y[-1]))


@dataclass(frozen=True)
class SpinEnsemble:
    """N spins with intrinsic and magnetically induced detunings.

    ``intrinsic_detunings`` model the fixed material linewidth (half-width
    delta_IB); ``induced_detunings`` model the controllable gradient
    broadening (half-width delta_inh).  The two are assigned to spins
    independently: induced values are laid out as a position grid, while
    intrinsic values are shuffled against that order (no correlation
    between a spin's position and its intrinsic shift).  The spin-cavity
    coupling is uniform and stored through its collective value
    kappa*sqrt(N).
    """

    intrinsic_detunings: np.ndarray
    induced_detunings: np.ndarray
    kappa_sqrt_n: float
    delta_ib: float = 0.0
    delta_inh: float = 0.0
    seed: int | None = 0

    def __post_init__(self):
        intr = np.asarray(self.intrinsic_detunings, dtype=float)
        indu = np.asarray(self.induced_detunings, dtype=float)
        if intr.shape != indu.shape or intr.ndim != 1:
            raise ConfigError("detuning vectors must be 1-d and equal length")
        if self.kappa_sqrt_n < 0:
            raise ConfigError("collective coupling must be >= 0")
        object.__setattr__(self, "intrinsic_detunings", intr)
        object.__setattr__(self, "induced_detunings", indu)

    @property
    def n_spins(self) -> int:
        return self.intrinsic_detunings.size

    @property
    def kappa(self) -> float:
        """Single-spin coupling kappa = (kappa sqrt N)/sqrt(N)."""
        return self.kappa_sqrt_n / np.sqrt(self.n_spins)

    @staticmethod
    def build(
        n_spins: int,
        delta_ib: float,
        delta_inh: float,
        kappa_sqrt_n: float,
        intrinsic_profile: str = "uniform-grid",
        seed: int | None = 0,
    ) -> "SpinEnsemble":
        """Assemble an ensemble with decorrelated detuning assignment.

        Induced detunings are the uniform position grid.  Intrinsic values
        come from ``build_detuning_grid`` and, for the deterministic grid
        profile, are permuted with the seeded generator so intrinsic and
        induced detunings are statistically independent across spins.
        Random profiles are already decorrelated by sampling.
        """
        induced = build_detuning_grid(delta_inh, n_spins, "uniform-grid")
        intrinsic = build_detuning_grid(delta_ib, n_spins, intrinsic_profile, seed=seed)
        if intrinsic_profile == "uniform-grid" and seed is not None and delta_ib > 0:
            intrinsic = np.random.default_rng(seed).permutation(intrinsic)
        return SpinEnsemble(
            intrinsic, induced, kappa_sqrt_n,
            delta_ib=delta_ib, delta_inh=delta_inh, seed=seed,
        )


@dataclass(frozen=True)
class FrequencyFrame:
    """Frame bookkeeping: qubit at zero, spins centered at ``spin_center``.

    ``global_offset`` shifts every frequency in the problem at once; all
    populations must be invariant under it (gauge check).
    """

    spin_center: float
    global_offset: float = 0.0


@dataclass(frozen=True)
class EfficiencyReport:
    eta_s: float
    eta_t: float
    eta_total: float = field(init=False)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, v in (("eta_s", self.eta_s), ("eta_t", self.eta_t)):
            if not (-1e-9 <= v <= 1 + 1e-9):
                raise ConfigError(f"{name}={v} outside [0, 1]")
        object.__setattr__(self, "eta_total", self.eta_s * self.eta_t)

    def as_dict(self) -> dict:
        return {
            "eta_s": self.eta_s,
            "eta_t": self.eta_t,
            "eta_total": self.eta_total,
            "provenance": dict(self.provenance),
        }


def build_detuning_grid(
    half_width: float,
    n: int,
    profile: str = "uniform-grid",
    seed: int | None = 0,
) -> np.ndarray:
    """Sample n detunings from a symmetric profile of the given half-width.

    uniform-grid is deterministic (equally spaced over [-hw, +hw], seed
    ignored); uniform-random and lorentzian are seed-deterministic draws.
    For lorentzian the half-width is the HWHM of the Cauchy profile.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if half_width < 0:
        raise ConfigError("half_width must be >= 0")
    if profile not in DETUNING_PROFILES:
        raise ConfigError(f"unknown profile {profile!r}, expected one of {DETUNING_PROFILES}")
    if half_width == 0:
        return np.zeros(n)
    if profile == "uniform-grid":
        if n == 1:
            return np.zeros(1)
        return np.linspace(-half_width, half_width, n)
    rng = np.random.default_rng(seed)
    if profile == "uniform-random":
        return rng.uniform(-half_width, half_width, n)
    return half_width * rng.standard_cauchy(n)


def state_norm(state: SingleExcitationState) -> float:
    """Total excitation norm sum|xi_j|^2 + |c|^2 + |q|^2."""
    return float(
        np.sum(np.abs(state.spin_amps) ** 2)
        + abs(state.cavity_amp) ** 2
        + abs(state.qubit_amp) ** 2
    )


def symmetric_overlap(state: SingleExcitationState) -> float:
    """Population |sum_j xi_j / sqrt(N)|^2 in the cavity-coupled symmetric mode."""
    n = state.n_spins
    return float(abs(np.sum(state.spin_amps)) ** 2 / n)


def golden_section(
    f,
    lo: float,
    hi: float,
    tol: float = 1e-6,
    fallback_points: int = 64,
):
    """Maximize a scalar function on [lo, hi].

    Golden-section search, preceded by a coarse unimodality probe.  When the
    probe sees multiple interior local maxima the landscape is not unimodal
    and we fall back to a dense scan of ``fallback_points`` samples.

    Returns (best_x, best_f, used_fallback).
    """
    if hi < lo:
        raise ConfigError("empty search range")
    if hi == lo:
        return lo, f(lo), False

    xs = np.linspace(lo, hi, 9)
    fs = np.array([f(x) for x in xs])
    interior = fs[1:-1]
    peaks = np.sum((interior > fs[:-2]) & (interior >= fs[2:]))
    if peaks > 1:
        xs = np.linspace(lo, hi, fallback_points)
        fs = np.array([f(x) for x in xs])
        k = int(np.argmax(fs))
        return float(xs[k]), float(fs[k]), True

    # bracket the coarse maximum then contract
    k = int(np.argmax(fs))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, len(xs) - 1)]
    invphi = (np.sqrt(5.0) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return float(x), float(f(x)), False
