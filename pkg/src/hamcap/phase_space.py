"""Coordinates, loops, lifts, and winding data on the annulus-torus phase space.

The phase space is the product of an open annulus (-R, R) x R/Z with
coordinates (p0, q0) and n torus factors (R/2Z x R/Z)^n with coordinates
(p_i, q_i), i = 1..n.  States are flat vectors

    z = (p0, q0, p1, q1, ..., pn, qn)

so momentum coordinates sit at even slots and angle coordinates at odd slots.
q0 and the q_i are modular with period 1, the p_i are modular with period 2,
and p0 is a plain real confined to the open annulus.

Loops are sequences of points sampled at equispaced times; a lift replaces
the modular coordinates by continuous real-valued paths.  Only homotopy
classes that wind in q0 and nowhere else are representable here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousLiftError, WrongClassError

#: Matching tolerance when deciding whether a modular jump is ambiguous.
_LIFT_EDGE_TOL = 1e-12


def flat_dim(n: int) -> int:
    """Length of the flat state vector for n torus factors."""
    return 2 * n + 2


def state_periods(n: int) -> np.ndarray:
    """Per-slot periods of the flat layout; 0 marks the non-modular p0 slot."""
    periods = np.empty(flat_dim(n))
    periods[0] = 0.0
    periods[1] = 1.0
    periods[2::2] = 2.0
    periods[3::2] = 1.0
    return periods


def wrap_state(z: np.ndarray, n: int) -> np.ndarray:
    """Reduce the modular slots of ``z`` to canonical representatives.

    q-type slots land in [0, 1), torus p-slots in [0, 2); p0 is untouched.
    Works on a single state or a batch with states along the last axis.
    """
    z = np.asarray(z, dtype=float).copy()
    periods = state_periods(n)
    modular = periods > 0
    z[..., modular] = np.mod(z[..., modular], periods[modular])
    return z


@dataclass(frozen=True)
class PhaseSpaceConfig:
    """Geometry of the phase space: annulus half-width R, marked level u, torus count n."""

    R: float
    u: float
    n: int

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"annulus half-width must be positive, got R={self.R}")
        if not -self.R < self.u < self.R:
            raise ValueError(f"marked level must satisfy -R < u < R, got u={self.u}")
        if self.n < 1:
            raise ValueError(f"need at least one torus factor, got n={self.n}")

    @property
    def m_u(self) -> float:
        """Bump-chart radial scale min(1, R - |u|), always in (0, 1]."""
        return min(1.0, self.R - abs(self.u))

    @property
    def center(self) -> np.ndarray:
        """Momentum-space center (u, 0, ..., 0) of the marked set, n+1 entries."""
        c = np.zeros(self.n + 1)
        c[0] = self.u
        return c

    @property
    def dim(self) -> int:
        return flat_dim(self.n)

    def periods(self) -> np.ndarray:
        return state_periods(self.n)

    def contains_level(self, p0) -> np.ndarray:
        """Strict annulus membership of a p0 level (vectorized)."""
        p0 = np.asarray(p0, dtype=float)
        return np.abs(p0) < self.R


@dataclass(frozen=True)
class PhasePoint:
    """A single phase-space point with modular coordinates stored canonically."""

    p0: float
    q0: float
    p: tuple
    q: tuple

    def __post_init__(self):
        if len(self.p) != len(self.q):
            raise ValueError("torus p and q coordinate counts differ")
        object.__setattr__(self, "q0", float(self.q0) % 1.0)
        object.__setattr__(self, "p", tuple(float(v) % 2.0 for v in self.p))
        object.__setattr__(self, "q", tuple(float(v) % 1.0 for v in self.q))
        object.__setattr__(self, "p0", float(self.p0))

    @property
    def n(self) -> int:
        return len(self.p)

    def to_state(self) -> np.ndarray:
        z = np.empty(flat_dim(self.n))
        z[0] = self.p0
        z[1] = self.q0
        z[2::2] = self.p
        z[3::2] = self.q
        return z

    @classmethod
    def from_state(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        return cls(p0=z[0], q0=z[1], p=tuple(z[2::2]), q=tuple(z[3::2]))


@dataclass(frozen=True)
class HomotopyClass:
    """Free homotopy class winding ``ell`` times in q0 with zero torus winding."""

    ell: int
    torus_winding: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ell", int(self.ell))
        tw = tuple(int(w) for w in self.torus_winding)
        if any(w != 0 for w in tw):
            raise ValueError("only classes with zero torus winding are representable")
        object.__setattr__(self, "torus_winding", tw)


def as_class(value, n: int) -> HomotopyClass:
    """Coerce an integer q0-winding into a HomotopyClass for n torus factors."""
    if isinstance(value, HomotopyClass):
        return value
    return HomotopyClass(ell=int(value), torus_winding=(0,) * (2 * n))


@dataclass(frozen=True)
class LoopSample:
    """A lifted closed loop: strictly increasing times on [0, 1] and real coordinates.

    ``states`` has one row per time including the closing sample at t = 1, so
    the lifted q0 column ends exactly ``ell`` above where it started while all
    torus columns return to their initial values.
    """

    times: np.ndarray
    states: np.ndarray
    homotopy_class: HomotopyClass

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "states", np.asarray(self.states, dtype=float))
        if self.times.ndim != 1 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states must have matching sample counts")
        if abs(self.times[0]) > 1e-15 or abs(self.times[-1] - 1.0) > 1e-15:
            raise ValueError("times must start at 0 and end at 1")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return (self.states.shape[1] - 2) // 2

    def wrapped(self) -> np.ndarray:
        """Project the lift back to canonical modular representatives."""
        return wrap_state(self.states, self.n)


def _loop_array(loop) -> np.ndarray:
    """Normalize a raw loop (PhasePoints or array) to a (K, d) float array."""
    if isinstance(loop, np.ndarray):
        arr = np.asarray(loop, dtype=float)
    else:
        loop = list(loop)
        if loop and isinstance(loop[0], PhasePoint):
            arr = np.stack([pt.to_state() for pt in loop])
        else:
            arr = np.asarray(loop, dtype=float)
    if arr.ndim != 2 or arr.shape[1] % 2 or arr.shape[1] < 4:
        raise ValueError("a raw loop must be a (K, 2n+2) sample array")
    if arr.shape[0] < 2:
        raise ValueError("a raw loop needs at least two samples")
    return arr


def _minimal_steps(arr: np.ndarray, n: int) -> np.ndarray:
    """Per-step minimal modular increments, including the closing step back to sample 0.

    Raises AmbiguousLiftError when any modular jump reaches half the period.
    """
    periods = state_periods(n)
    closed = np.vstack([arr, arr[:1]])
    diffs = np.diff(closed, axis=0)
    for slot in range(1, arr.shape[1]):
        period = periods[slot]
        d = diffs[:, slot]
        d = np.mod(d + period / 2.0, period) - period / 2.0
        if np.any(np.abs(d) >= period / 2.0 - _LIFT_EDGE_TOL):
            raise AmbiguousLiftError(
                f"modular jump of >= half period in slot {slot}; refine the sampling"
            )
        diffs[:, slot] = d
    return diffs


def winding_numbers(loop) -> np.ndarray:
    """Winding numbers of a raw closed loop, ordered (q0, p1, q1, ..., pn, qn).

    Samples are read as values at t = k/K with the closure step back to the
    first sample implied.  Each modular coordinate is lifted by the unique
    shortest per-step increment; the winding is the lifted endpoint difference
    divided by the period.
    """
    arr = _loop_array(loop)
    n = (arr.shape[1] - 2) // 2
    periods = state_periods(n)
    diffs = _minimal_steps(arr, n)
    totals = diffs.sum(axis=0)
    winding = np.zeros(2 * n + 1, dtype=int)
    for out, slot in enumerate(range(1, arr.shape[1])):
        w = totals[slot] / periods[slot]
        w_int = int(round(w))
        if abs(w - w_int) > 1e-9:
            raise AmbiguousLiftError(f"non-integer winding {w} in slot {slot}")
        winding[out] = w_int
    return winding


def lift_loop(loop, homotopy_class) -> LoopSample:
    """Lift a raw closed loop to continuous coordinates in the given class.

    The returned sample has K+1 rows at times k/K, the last one being the
    lifted closure point.  Fails with WrongClassError when the loop's winding
    numbers are not (ell, 0, ..., 0).
    """
    arr = _loop_array(loop)
    n = (arr.shape[1] - 2) // 2
    if isinstance(homotopy_class, (int, np.integer)):
        homotopy_class = as_class(homotopy_class, n)
    winding = winding_numbers(arr)
    expected = np.zeros(2 * n + 1, dtype=int)
    expected[0] = homotopy_class.ell
    if not np.array_equal(winding, expected):
        raise WrongClassError(
            f"loop winds {tuple(winding)} but class requires {tuple(expected)}"
        )
    diffs = _minimal_steps(arr, n)
    lifted = np.empty((arr.shape[0] + 1, arr.shape[1]))
    lifted[0] = arr[0]
    lifted[1:] = arr[0] + np.cumsum(diffs, axis=0)
    lifted[1:-1, 0] = arr[1:, 0]  # p0 is not modular; keep raw values
    lifted[0, 0] = arr[0, 0]
    lifted[-1, 0] = arr[0, 0]
    K = arr.shape[0]
    times = np.arange(K + 1) / K
    return LoopSample(times=times, states=lifted, homotopy_class=homotopy_class)


def loop_to_json(loop, lifted: bool = False) -> str:
    """Serialize a loop as a JSON array of {t, p0, q0, p, q} records."""
    if isinstance(loop, LoopSample):
        arr = loop.states
        times = loop.times
        lifted = True
    else:
        arr = _loop_array(loop)
        times = np.arange(arr.shape[0]) / arr.shape[0]
    records = []
    for t, row in zip(times, arr):
        rec = {
            "t": float(t),
            "p0": float(row[0]),
            "q0": float(row[1]),
            "p": [float(v) for v in row[2::2]],
            "q": [float(v) for v in row[3::2]],
        }
        if lifted:
            rec["lifted"] = True
        records.append(rec)
    return json.dumps(records)


def loop_from_json(text: str):
    """Parse a loop serialized by :func:`loop_to_json`.

    Returns a LoopSample when the records are marked lifted (class inferred
    from the q0 endpoint difference), otherwise a list of PhasePoints.
    """
    records = json.loads(text)
    if not records:
        raise ValueError("empty loop")
    is_lifted = all(rec.get("lifted", False) for rec in records)
    rows = []
    for rec in records:
        row = [rec["p0"], rec["q0"]]
        for pv, qv in zip(rec["p"], rec["q"]):
            row.extend([pv, qv])
        rows.append(row)
    arr = np.array(rows, dtype=float)
    if not is_lifted:
        return [PhasePoint.from_state(z) for z in arr]
    times = np.array([rec["t"] for rec in records], dtype=float)
    n = (arr.shape[1] - 2) // 2
    ell = int(round(arr[-1, 1] - arr[0, 1]))
    return LoopSample(times=times, states=arr, homotopy_class=as_class(ell, n))
