"""Measured quantities: probability density, participation ratio, survival
probability and phase-portrait series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .state import WalkerState


@dataclass
class TimeSeries:
    """Scalar observable sampled densely at integer time steps.

    ``values[k]`` is the sample at ``t = start + k``.
    """

    name: str
    values: np.ndarray
    start: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> int:
        """Last covered time step (inclusive)."""
        return self.start + len(self.values) - 1

    @property
    def times(self) -> np.ndarray:
        return self.start + np.arange(len(self.values))

    def window(self, t_lo: int, t_hi: int) -> np.ndarray:
        """Values over the inclusive time window [t_lo, t_hi]."""
        if t_lo < self.start or t_hi > self.end or t_hi < t_lo:
            raise ValueError(
                f"window [{t_lo}, {t_hi}] outside series range "
                f"[{self.start}, {self.end}]"
            )
        return self.values[t_lo - self.start : t_hi - self.start + 1]


@dataclass
class DensityProfile:
    """Coin-resolved and total site probabilities at one time step."""

    t: int
    n: np.ndarray
    pL: np.ndarray
    pS: np.ndarray
    pR: np.ndarray
    pTotal: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.pTotal is None:
            self.pTotal = self.pL + self.pS + self.pR


def probability_density(state: WalkerState) -> DensityProfile:
    """Per-site probabilities of ``state``, per coin component and total."""
    p = state.amps.real**2 + state.amps.imag**2
    return DensityProfile(
        t=state.t,
        n=state.sites(),
        pL=p[:, 0],
        pS=p[:, 1],
        pR=p[:, 2],
        pTotal=p.sum(axis=1),
    )


def participation_ratio(state: WalkerState) -> float:
    """Effective number of occupied sites, 1 / sum_n (|psi_n|^2)^2.

    |psi_n|^2 is the site total over the three coin components, so a
    state on a single site gives 1 and a state uniform over m sites
    gives m.
    """
    p = state.amps.real**2 + state.amps.imag**2
    ptot = p.sum(axis=1)
    return float(1.0 / np.dot(ptot, ptot))


def survival_probability(state: WalkerState) -> float:
    """Total probability at the origin site n = 0."""
    i = -state.offset
    if i < 0 or i >= state.amps.shape[0]:
        return 0.0
    row = state.amps[i]
    return float(np.sum(row.real**2 + row.imag**2))


def phase_portrait(sp: TimeSeries, every: int = 1) -> np.ndarray:
    """Orbit of (SP, dSP/dt) pairs with the backward difference dSP/dt.

    Row k is (SP(t), SP(t) - SP(t-1)) for t = start + 1 + k*every.
    ``every`` subsamples the orbit to keep large runs manageable.
    """
    if len(sp) < 2:
        raise ValueError("phase portrait needs a series with at least 2 points")
    if every < 1:
        raise ValueError("every must be >= 1")
    v = np.diff(sp.values)
    pairs = np.column_stack([sp.values[1:], v])
    return pairs[::every]
