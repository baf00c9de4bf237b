"""Split-step evolution of the walker.

One step applies, in order: the amplitude-dependent phase (each component
is multiplied by exp(i*2*pi*chi*|amplitude|^2) using its own squared
magnitude), the Grover coin at every site, and the conditional shift
(L one site left, S in place, R one site right).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .observables import DensityProfile, TimeSeries
from .state import WalkerState

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

#: The Grover coin, the reflection 2|s><s| - I about the uniform coin vector.
GROVER_COIN = np.array(
    [[-1.0, 2.0, 2.0], [2.0, -1.0, 2.0], [2.0, 2.0, -1.0]]
) / 3.0

# Edge sites whose amplitudes fall below this floor in both quadratures are
# dropped from storage by evolve(); the discarded weight is < 1e-298 total,
# far below every tolerance in use, and it keeps denormals out of the hot loop.
TRIM_FLOOR = 1e-150

# Norm deviation treated as numerical blow-up by evolve().
NORM_ABORT = 1e-8


@dataclass(frozen=True)
class StepParams:
    """Evolution parameters; ``chi`` is the nonlinearity strength."""

    chi: float

    def __post_init__(self):
        if self.chi < 0:
            raise ValueError(f"chi must be >= 0, got {self.chi}")
        if self.chi > 2:
            logger.warning(
                "chi=%g exceeds 2: the nonlinear phase wraps modulo 2*pi", self.chi
            )


def apply_nonlinear_phase(state: WalkerState, params: StepParams) -> WalkerState:
    """Multiply each amplitude by exp(i*2*pi*chi*|amplitude|^2)."""
    if params.chi == 0.0:
        return WalkerState(state.t, state.offset, state.amps.copy())
    p = state.amps.real**2 + state.amps.imag**2
    g = (TWO_PI * params.chi) * p
    amps = state.amps * (np.cos(g) + 1j * np.sin(g))
    return WalkerState(state.t, state.offset, amps)


def apply_coin(state: WalkerState) -> WalkerState:
    """Left-multiply every site's coin triple by the Grover coin."""
    u = state.amps.sum(axis=1) * (2.0 / 3.0)
    amps = u[:, None] - state.amps
    return WalkerState(state.t, state.offset, amps)


def apply_shift(state: WalkerState) -> WalkerState:
    """Move L components one site left and R one site right; S stays.

    The stored range grows by one site on each side.
    """
    m = state.amps.shape[0]
    amps = np.zeros((m + 2, 3), dtype=np.complex128)
    amps[0:m, 0] = state.amps[:, 0]
    amps[1 : m + 1, 1] = state.amps[:, 1]
    amps[2 : m + 2, 2] = state.amps[:, 2]
    return WalkerState(state.t, state.offset - 1, amps)


def step(state: WalkerState, params: StepParams) -> WalkerState:
    """Advance one time step: phase, then coin, then shift."""
    out = apply_shift(apply_coin(apply_nonlinear_phase(state, params)))
    return WalkerState(state.t + 1, out.offset, out.amps)


# ---------------------------------------------------------------------------
# Fused step kernels.  evolve() advances the walker with a single pass per
# step over planar (real, imag) arrays: per site it applies phase and coin,
# writes the shifted result into the destination planes, and emits the
# pre-step site probability (used for SP/PR/norm recording and as the phase
# feedback).  Destination row i gets L from site i+1, S from site i+1-1, R
# from site i+1+1 of the source window, i.e. source site i writes dst rows
# (i, i+1, i+2) in columns (L, S, R): every cell is written exactly once,
# so the site loop is safely parallel.
# ---------------------------------------------------------------------------

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_USE_NUMBA = HAVE_NUMBA

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _sincos(x):
        # sin/cos for x >= 0 via Cody-Waite reduction by pi/2 and the
        # standard minimax polynomials on [-pi/4, pi/4]; max error ~1 ulp.
        # Library sin/cos are avoided here: this inlines and is several
        # times faster than scalar libm calls in the hot loop.
        if x < 0.78539816339744828:
            k = 0
            r = x
        else:
            k = int(x * 0.63661977236758138 + 0.5)
            kd = float(k)
            r = x - kd * 1.57079632673412561417e00
            r -= kd * 6.07710050650619224932e-11
            r -= kd * 2.02226624879595063154e-21
        z = r * r
        s = r + r * z * (
            -1.66666666666666324348e-01
            + z
            * (
                8.33333333332248946124e-03
                + z
                * (
                    -1.98412698298579493134e-04
                    + z
                    * (
                        2.75573137070700676789e-06
                        + z
                        * (
                            -2.50507602534068634195e-08
                            + z * 1.58969099521155010221e-10
                        )
                    )
                )
            )
        )
        c = 1.0 - 0.5 * z + z * z * (
            4.16666666666666019037e-02
            + z
            * (
                -1.38888888888741095749e-03
                + z
                * (
                    2.48015872894767294178e-05
                    + z
                    * (
                        -2.75573143513906633035e-07
                        + z
                        * (
                            2.08757232129817482790e-09
                            + z * -1.13596475577881948265e-11
                        )
                    )
                )
            )
        )
        q = k & 3
        if q == 0:
            return s, c
        elif q == 1:
            return c, -s
        elif q == 2:
            return -s, -c
        else:
            return -c, s

    @njit(cache=True, parallel=True)
    def _pass_numba(sre, sim, dre, dim, ptot, K):
        m = sre.shape[0]
        nonlinear = K != 0.0
        for i in prange(m):
            aL = sre[i, 0]
            bL = sim[i, 0]
            aS = sre[i, 1]
            bS = sim[i, 1]
            aR = sre[i, 2]
            bR = sim[i, 2]
            pL = aL * aL + bL * bL
            pS = aS * aS + bS * bS
            pR = aR * aR + bR * bR
            ptot[i] = pL + pS + pR
            if nonlinear:
                s, c = _sincos(K * pL)
                aL, bL = aL * c - bL * s, aL * s + bL * c
                s, c = _sincos(K * pS)
                aS, bS = aS * c - bS * s, aS * s + bS * c
                s, c = _sincos(K * pR)
                aR, bR = aR * c - bR * s, aR * s + bR * c
            ur = (aL + aS + aR) * (2.0 / 3.0)
            ui = (bL + bS + bR) * (2.0 / 3.0)
            dre[i, 0] = ur - aL
            dim[i, 0] = ui - bL
            dre[i + 1, 1] = ur - aS
            dim[i + 1, 1] = ui - bS
            dre[i + 2, 2] = ur - aR
            dim[i + 2, 2] = ui - bR


def _pass_numpy(sre, sim, dre, dim, ptot, K):
    p = sre * sre + sim * sim
    np.sum(p, axis=1, out=ptot)
    if K != 0.0:
        g = K * p
        c = np.cos(g)
        s = np.sin(g)
        re = sre * c - sim * s
        im = sre * s + sim * c
    else:
        re = sre
        im = sim
    ur = re.sum(axis=1) * (2.0 / 3.0)
    ui = im.sum(axis=1) * (2.0 / 3.0)
    re = ur[:, None] - re
    im = ui[:, None] - im
    m = sre.shape[0]
    dre[0:m, 0] = re[:, 0]
    dim[0:m, 0] = im[:, 0]
    dre[1 : m + 1, 1] = re[:, 1]
    dim[1 : m + 1, 1] = im[:, 1]
    dre[2 : m + 2, 2] = re[:, 2]
    dim[2 : m + 2, 2] = im[:, 2]


def _row_negligible(re: np.ndarray, im: np.ndarray, i: int) -> bool:
    return (
        abs(re[i, 0]) <= TRIM_FLOOR
        and abs(re[i, 1]) <= TRIM_FLOOR
        and abs(re[i, 2]) <= TRIM_FLOOR
        and abs(im[i, 0]) <= TRIM_FLOOR
        and abs(im[i, 1]) <= TRIM_FLOOR
        and abs(im[i, 2]) <= TRIM_FLOOR
    )


def _density_from_planes(t, offset, sre, sim) -> DensityProfile:
    pL = sre[:, 0] ** 2 + sim[:, 0] ** 2
    pS = sre[:, 1] ** 2 + sim[:, 1] ** 2
    pR = sre[:, 2] ** 2 + sim[:, 2] ** 2
    n = offset + np.arange(sre.shape[0])
    return DensityProfile(t=t, n=n, pL=pL, pS=pS, pR=pR, pTotal=pL + pS + pR)


@dataclass
class RunRecord:
    """Everything recorded during one evolve() call.

    SP, PR and norm are sampled at every step including the initial state;
    density snapshots are taken whenever ``(t - t_initial)`` is a multiple
    of ``record_every``, plus the final step.
    """

    chi: float
    steps: int
    record_every: int
    sp: TimeSeries
    pr: TimeSeries
    norm: TimeSeries
    snapshots: list[DensityProfile] = field(default_factory=list)
    final_state: WalkerState | None = None


def evolve(
    initial: WalkerState,
    params: StepParams,
    steps: int,
    record_every: int = 10,
    snapshot_sink=None,
) -> RunRecord:
    """Iterate the step operator and record observables.

    Deterministic: identical inputs give bit-identical records.  If
    ``snapshot_sink`` is given, each DensityProfile is passed to it as it
    is produced (and not retained), so long runs need O(steps) memory.

    Raises RuntimeError if the norm drifts from 1 by more than 1e-8,
    which signals numerical blow-up.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")

    K = TWO_PI * params.chi
    t0 = initial.t
    m0 = initial.amps.shape[0]
    nfull = m0 + 2 * steps
    base_site = initial.offset - steps  # site index of buffer row 0
    origin_full = -base_site  # buffer row of site n = 0

    a_re = np.zeros((nfull, 3))
    a_im = np.zeros((nfull, 3))
    b_re = np.zeros((nfull, 3))
    b_im = np.zeros((nfull, 3))
    ptot_buf = np.empty(nfull)
    lo = steps
    hi = steps + m0 - 1
    a_re[lo : hi + 1] = initial.amps.real
    a_im[lo : hi + 1] = initial.amps.imag

    sp = np.empty(steps + 1)
    pr = np.empty(steps + 1)
    nrm = np.empty(steps + 1)
    snapshots: list[DensityProfile] = []
    sink = snapshot_sink if snapshot_sink is not None else snapshots.append

    step_pass = _pass_numba if (_USE_NUMBA and HAVE_NUMBA) else _pass_numpy

    def _record(k: int, pt: np.ndarray) -> None:
        t = t0 + k
        total = float(np.sum(pt))
        nrm[k] = total
        if abs(total - 1.0) > NORM_ABORT:
            raise RuntimeError(
                f"norm blew up: |psi|^2 = {total!r} at t = {t} (chi = {params.chi})"
            )
        oi = origin_full - lo
        sp[k] = float(pt[oi]) if 0 <= oi < pt.shape[0] else 0.0
        pr[k] = float(1.0 / np.dot(pt, pt))

    for k in range(steps):
        t = t0 + k
        m = hi - lo + 1
        sre = a_re[lo : hi + 1]
        sim = a_im[lo : hi + 1]
        dre = b_re[lo - 1 : hi + 2]
        dim = b_im[lo - 1 : hi + 2]
        # cells the shift never writes (may hold stale data from 2 steps ago)
        dre[m, 0] = dre[m + 1, 0] = dim[m, 0] = dim[m + 1, 0] = 0.0
        dre[0, 1] = dre[m + 1, 1] = dim[0, 1] = dim[m + 1, 1] = 0.0
        dre[0, 2] = dre[1, 2] = dim[0, 2] = dim[1, 2] = 0.0

        pt = ptot_buf[:m]
        step_pass(sre, sim, dre, dim, pt, K)

        _record(k, pt)
        if k % record_every == 0:
            sink(_density_from_planes(t, base_site + lo, sre, sim))

        lo -= 1
        hi += 1
        a_re, b_re = b_re, a_re
        a_im, b_im = b_im, a_im
        while hi > lo and _row_negligible(a_re, a_im, hi):
            hi -= 1
        while hi > lo and _row_negligible(a_re, a_im, lo):
            lo += 1

    m = hi - lo + 1
    sre = a_re[lo : hi + 1]
    sim = a_im[lo : hi + 1]
    pt = ptot_buf[:m]
    np.sum(sre * sre + sim * sim, axis=1, out=pt)
    _record(steps, pt)
    sink(_density_from_planes(t0 + steps, base_site + lo, sre, sim))

    final = WalkerState(t0 + steps, base_site + lo, sre + 1j * sim)
    return RunRecord(
        chi=params.chi,
        steps=steps,
        record_every=record_every,
        sp=TimeSeries("SP", sp, start=t0),
        pr=TimeSeries("PR", pr, start=t0),
        norm=TimeSeries("norm", nrm, start=t0),
        snapshots=snapshots,
        final_state=final,
    )
