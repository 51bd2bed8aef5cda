"""Line-soliton tau functions, frames, fields and far-field profiles.

Everything is built from tau = sum of Vandermonde-weighted minors times
exponentials of theta_m = kappa_m x + kappa_m^2 y - kappa_m^3 t, and the
field u = 2 (log tau)_xx.  Supported configurations: the vacuum, a single
line soliton on any phase pair, and the two nondegenerate two-line types
with four phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DegenerateFrame, InvalidBranch, RejectedConfig
from .expsum import ExpSum, Gen, log_derivatives

KINDS = ("vacuum", "one_line", "p_type", "o_type")


@lru_cache(maxsize=None)
def theta_gens(kappa: tuple[float, ...]) -> tuple[Gen, ...]:
    """Shared phase generators (kappa, kappa^2, -kappa^3), one per phase."""
    return tuple((complex(k), complex(k * k), complex(-(k * k * k))) for k in kappa)


def theta_eval(kappa: tuple[float, ...], m: int, x, y, t) -> np.ndarray:
    """theta_m on broadcast points, m is 1-based."""
    k = kappa[m - 1]
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    return k * x + k * k * y - k ** 3 * t


def _vandermonde(vals: tuple[float, ...]) -> float:
    out = 1.0
    for s in range(len(vals)):
        for r in range(s + 1, len(vals)):
            out *= vals[r] - vals[s]
    return out


def minor_expansion(kappa: tuple[float, ...], amatrix: np.ndarray) -> list[tuple[tuple[int, ...], float]]:
    """Nonzero (row subset, minor times Vandermonde) pairs of tau.

    Subsets are 0-based index tuples.  Minors must be nonnegative and the
    matrix must have full column rank, else the configuration is rejected.
    """
    amatrix = np.asarray(amatrix, dtype=float)
    big_m, small_n = amatrix.shape
    if len(kappa) != big_m:
        raise RejectedConfig(f"coefficient matrix has {big_m} rows for {len(kappa)} phases")
    if small_n > big_m:
        raise RejectedConfig("more columns than phases")
    scale = max(1.0, float(np.abs(amatrix).max(initial=0.0)) ** small_n)
    out: list[tuple[tuple[int, ...], float]] = []
    any_positive = False
    for subset in combinations(range(big_m), small_n):
        minor = float(np.linalg.det(amatrix[list(subset), :])) if small_n else 1.0
        if minor < -1e-12 * scale:
            raise RejectedConfig(f"negative minor {minor:.3e} on rows {tuple(s + 1 for s in subset)}")
        if minor <= 1e-12 * scale:
            continue
        any_positive = True
        out.append((subset, minor * _vandermonde(tuple(kappa[s] for s in subset))))
    if small_n and not any_positive:
        raise RejectedConfig("coefficient matrix has rank below its column count")
    if small_n and np.linalg.matrix_rank(amatrix) < small_n:
        raise RejectedConfig("coefficient matrix has rank below its column count")
    return out


def wronskian_tau(kappa: tuple[float, ...], amatrix: np.ndarray) -> ExpSum:
    """tau from phases kappa and an M x N coefficient matrix.

    Expands the Wronskian of f_n = sum_m a_{mn} exp(theta_m) into minors:
    every subset S of N rows contributes det(A[S]) times the Vandermonde
    of kappa[S] times exp(sum of theta over S).
    """
    big_m = len(kappa)
    terms = [(tuple(1 if m in subset else 0 for m in range(big_m)), complex(weight))
             for subset, weight in minor_expansion(kappa, amatrix)]
    return ExpSum.from_terms(theta_gens(kappa), terms)


@dataclass(frozen=True)
class SolitonConfig:
    kind: str                          # one of KINDS
    kappa: tuple[float, ...]           # strictly increasing phase speeds
    pair: tuple[int, int] | None = None  # 1-based phase pair for one_line

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RejectedConfig(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "kappa", tuple(float(k) for k in self.kappa))
        ks = self.kappa
        for a, b in zip(ks, ks[1:]):
            if not b > a:
                raise RejectedConfig(f"phases must increase strictly, got {a} before {b}")
        if self.kind in ("p_type", "o_type"):
            if len(ks) != 4:
                raise RejectedConfig(f"{self.kind} needs 4 phases, got {len(ks)}")
            if self.pair is not None:
                raise RejectedConfig(f"{self.kind} does not take a pair")
        if self.kind == "one_line":
            if self.pair is None:
                raise RejectedConfig("one_line needs a pair")
            i, j = self.pair
            if not (1 <= i < j <= len(ks)):
                raise RejectedConfig(f"pair {self.pair} out of range for {len(ks)} phases")
            object.__setattr__(self, "pair", (int(i), int(j)))
        if self.kind == "vacuum" and self.pair is not None:
            raise RejectedConfig("vacuum does not take a pair")

    # ----- structure -----

    @property
    def m_phases(self) -> int:
        return len(self.kappa)

    @property
    def n_functions(self) -> int:
        return {"vacuum": self.m_phases, "one_line": 1, "p_type": 2, "o_type": 2}[self.kind]

    def amatrix(self) -> np.ndarray:
        m = self.m_phases
        if self.kind == "vacuum":
            return np.eye(m)
        if self.kind == "one_line":
            col = np.zeros((m, 1))
            col[self.pair[0] - 1, 0] = 1.0
            col[self.pair[1] - 1, 0] = 1.0
            return col
        if self.kind == "p_type":
            return np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [-1.0, 0.0]])
        return np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])

    def gens(self) -> tuple[Gen, ...]:
        return theta_gens(self.kappa)

    def tau(self) -> ExpSum:
        return build_tau(self)

    def field(self) -> "SolitonField":
        return SolitonField(self)

    def channel_pairs(self) -> tuple[tuple[int, int], ...]:
        """Phase pairs of the asymptotic line solitons, 1-based."""
        if self.kind == "p_type":
            return ((2, 3), (1, 4))
        if self.kind == "o_type":
            return ((1, 2), (3, 4))
        if self.kind == "one_line":
            return (self.pair,)
        return ()

    def a_of(self, pair: tuple[int, int]) -> float:
        i, j = pair
        return 0.5 * (self.kappa[i - 1] + self.kappa[j - 1])

    def c_of(self, pair: tuple[int, int]) -> float:
        i, j = pair
        return 0.25 * (self.kappa[i - 1] - self.kappa[j - 1]) ** 2

    def omega_of(self, pair: tuple[int, int]) -> float:
        i, j = pair
        ki, kj = self.kappa[i - 1], self.kappa[j - 1]
        return ki * ki + ki * kj + kj * kj


@lru_cache(maxsize=None)
def build_tau(config: SolitonConfig) -> ExpSum:
    return wronskian_tau(config.kappa, config.amatrix())


@dataclass(frozen=True)
class Channel:
    pair: tuple[int, int]   # 1-based phases
    a: float                # half sum of the two phase speeds
    c: float                # quarter squared gap
    omega: float            # kappa_i^2 + kappa_i kappa_j + kappa_j^2


@dataclass(frozen=True)
class Frame:
    b1: float
    b2: float
    channels: tuple[Channel, Channel]

    def channel(self, pair: tuple[int, int]) -> Channel:
        for ch in self.channels:
            if ch.pair == pair:
                return ch
        raise InvalidBranch(f"no channel {pair} in this frame")


def frame_of(config: SolitonConfig) -> Frame:
    """Co-moving frame speeds (b1, b2) that freeze both line solitons.

    Solves b1 + 2 a_ij b2 = omega_ij on the two channels; a one-channel or
    equal-slope configuration leaves the system singular.
    """
    pairs = config.channel_pairs()
    if len(pairs) != 2:
        raise DegenerateFrame(f"{config.kind} has {len(pairs)} channel(s), frame needs 2")
    chans = tuple(Channel(p, config.a_of(p), config.c_of(p), config.omega_of(p)) for p in pairs)
    a1, a2 = chans[0].a, chans[1].a
    scale = max(1.0, abs(a1), abs(a2))
    if abs(a1 - a2) <= 1e-12 * scale:
        raise DegenerateFrame(f"channel slopes coincide, a={a1}")
    b2 = (chans[1].omega - chans[0].omega) / (2.0 * (a2 - a1))
    b1 = chans[0].omega - 2.0 * a1 * b2
    return Frame(b1=b1, b2=b2, channels=chans)


def sech2(z: np.ndarray) -> np.ndarray:
    """sech^2 without overflow at large |z|."""
    e = np.exp(-2.0 * np.abs(z))
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class Profile:
    """One far-field line soliton: amplitude * sech^2((theta_j - theta_i)/2 + mu)."""
    kappa: tuple[float, ...]
    pair: tuple[int, int]
    amplitude: float
    mu: float

    def eval(self, x, y, t) -> np.ndarray:
        i, j = self.pair
        z = 0.5 * (theta_eval(self.kappa, j, x, y, t) - theta_eval(self.kappa, i, x, y, t)) + self.mu
        return self.amplitude * sech2(z)


def asymptotic_profile(config: SolitonConfig, pair: tuple[int, int], y_sign: int) -> Profile:
    """Far-field soliton on `pair` as y_sign * y grows large.

    The phase shift mu depends on which side of the interaction region the
    channel is observed from; y_sign is the sign of y along the excursion.
    """
    if y_sign not in (1, -1):
        raise InvalidBranch(f"y_sign must be +1 or -1, got {y_sign}")
    pair = (int(pair[0]), int(pair[1]))
    if pair not in config.channel_pairs():
        raise InvalidBranch(f"{pair} is not a channel of this {config.kind} configuration")
    k = config.kappa
    amp = 2.0 * config.c_of(pair)
    if config.kind == "one_line":
        return Profile(k, pair, amp, 0.0)

    def lg(num: float, den: float) -> float:
        return 0.5 * math.log(num / den)

    if config.kind == "p_type":
        label = y_sign * (1 if config.a_of((1, 4)) > config.a_of((2, 3)) else -1)
        if pair == (2, 3):
            mu = lg(k[3] - k[2], k[3] - k[1]) if label > 0 else lg(k[2] - k[0], k[1] - k[0])
        else:
            lbl = -label
            mu = lg(k[3] - k[2], k[2] - k[0]) if lbl > 0 else lg(k[3] - k[1], k[1] - k[0])
    else:
        label = y_sign
        if pair == (1, 2):
            mu = lg(k[3] - k[1], k[3] - k[0]) if label > 0 else lg(k[2] - k[1], k[2] - k[0])
        else:
            lbl = -label
            mu = lg(k[3] - k[1], k[2] - k[1]) if lbl > 0 else lg(k[3] - k[0], k[2] - k[0])
    return Profile(k, pair, amp, mu)


class SolitonField:
    """Evaluates u = 2 (log tau)_xx and its mixed partials on point sets."""

    def __init__(self, config: SolitonConfig):
        self.config = config
        self.tau = build_tau(config)

    def log_grid(self, x, y, t, orders: tuple[int, int, int]):
        return log_derivatives(self.tau, orders, x, y, t)

    def u(self, x, y, t) -> np.ndarray:
        return 2.0 * self.log_grid(x, y, t, (2, 0, 0))[(2, 0, 0)].real

    def u_partial(self, x, y, t, i: int = 0, j: int = 0, k: int = 0) -> np.ndarray:
        g = self.log_grid(x, y, t, (2 + i, j, k))
        return 2.0 * g[(2 + i, j, k)].real

    def tau_eval(self, x, y, t) -> np.ndarray:
        return self.tau.eval(x, y, t).real

    def kpii_residual(self, x, y, t) -> tuple[np.ndarray, np.ndarray]:
        """Pointwise |4u_xt + u_xxxx + 3(u^2)_xx + 3u_yy| and its term scale."""
        g = self.log_grid(x, y, t, (6, 2, 1))

        def d(i, j, k):
            return 2.0 * g[(i + 2, j, k)].real

        u = d(0, 0, 0)
        term_t = 4.0 * d(1, 0, 1)
        term_x4 = d(4, 0, 0)
        term_nl = 3.0 * (2.0 * d(1, 0, 0) ** 2 + 2.0 * u * d(2, 0, 0))
        term_y2 = 3.0 * d(0, 2, 0)
        res = np.abs(term_t + term_x4 + term_nl + term_y2)
        scale = np.maximum.reduce([np.abs(term_t), np.abs(term_x4), np.abs(term_nl), np.abs(term_y2)])
        return res, np.maximum(scale, 1e-30)
