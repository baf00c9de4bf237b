"""Walker states on the line and the standard coin vectors.

The coin space is three dimensional with components ordered (L, S, R):
L moves the walker one site left, S keeps it in place, R moves it right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COIN_LABELS = ("L", "S", "R")

_S3 = 1.0 / np.sqrt(3.0)
_S6 = 1.0 / np.sqrt(6.0)
_S2 = 1.0 / np.sqrt(2.0)

#: Named coin vectors: the three basis labels plus the eigenvectors of the
#: Grover coin (sigma_plus has eigenvalue +1, the two sigma_minus have -1).
COIN_VECTORS = {
    "L": (1.0, 0.0, 0.0),
    "S": (0.0, 1.0, 0.0),
    "R": (0.0, 0.0, 1.0),
    "sigma_plus": (_S3, _S3, _S3),
    "sigma_minus_1": (_S6, -2.0 * _S6, _S6),
    "sigma_minus_2": (_S2, 0.0, -_S2),
}

COIN_NAMES = tuple(COIN_VECTORS)


@dataclass(frozen=True)
class CoinVector:
    """Normalized 3-component complex vector in the coin space."""

    aL: complex
    aS: complex
    aR: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.aL, self.aS, self.aR], dtype=np.complex128)

    def norm(self) -> float:
        return float(abs(self.aL) ** 2 + abs(self.aS) ** 2 + abs(self.aR) ** 2)


def coin_basis(name: str) -> CoinVector:
    """Return one of the six named coin vectors (see ``COIN_NAMES``)."""
    try:
        a = COIN_VECTORS[name]
    except KeyError:
        raise ValueError(
            f"unknown coin name {name!r}; expected one of {', '.join(COIN_NAMES)}"
        ) from None
    return CoinVector(*a)


def _coin_index(c: str | int) -> int:
    if isinstance(c, str):
        try:
            return COIN_LABELS.index(c)
        except ValueError:
            raise ValueError(f"unknown coin label {c!r}; expected L, S or R") from None
    if c not in (0, 1, 2):
        raise ValueError(f"coin index out of range: {c}")
    return c


@dataclass
class WalkerState:
    """Amplitude field over stored lattice sites at one time step.

    ``amps[i, c]`` is the amplitude at site ``offset + i`` for coin
    component ``c`` in (L, S, R) order.  Sites outside the stored range
    carry exactly zero amplitude; evolution keeps the range inside the
    light cone ``[-t, t]`` around the starting position.
    """

    t: int
    offset: int
    amps: np.ndarray  # (n_sites, 3) complex128

    def sites(self) -> np.ndarray:
        """Stored site indices, lowest first."""
        return self.offset + np.arange(self.amps.shape[0])

    def amplitude(self, n: int, c: str | int) -> complex:
        """Amplitude at site ``n``, coin ``c``; exactly 0 outside storage."""
        i = n - self.offset
        if i < 0 or i >= self.amps.shape[0]:
            return 0.0 + 0.0j
        return complex(self.amps[i, _coin_index(c)])

    def norm(self) -> float:
        """Total probability, summed over all sites and coin components."""
        return float(np.sum(self.amps.real**2 + self.amps.imag**2))

    def copy(self) -> "WalkerState":
        return WalkerState(self.t, self.offset, self.amps.copy())


def new_localized(position: int, coin: CoinVector) -> WalkerState:
    """State at t = 0 fully concentrated on one site with the given coin."""
    dev = abs(coin.norm() - 1.0)
    if dev > 1e-9:
        raise ValueError(f"coin vector is not normalized (|norm - 1| = {dev:.3e})")
    amps = coin.as_array().reshape(1, 3)
    return WalkerState(t=0, offset=position, amps=amps)
