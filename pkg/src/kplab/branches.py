"""Square-root spectral branches attached to a soliton channel.

Each channel (i, j) carries gamma(eta) = sqrt(c_ij + i eta) on the principal
branch, the two spectral points beta = a_ij +/- gamma, and the eigenvalue
arcs i eta (gamma(+/-eta) +/- (3 a_ij - b2)).  Everything accepts real or
complex eta, scalar or array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchCutCrossing


@dataclass(frozen=True)
class Branch:
    a: float   # half sum of the channel's phase speeds
    c: float   # quarter squared gap, the sech^2 amplitude scale

    def gamma(self, eta):
        """Principal sqrt(c + i eta); rejects points on the cut."""
        z = self.c + 1j * np.asarray(eta, dtype=complex)
        on_cut = (z.real < 0) & (z.imag == 0)
        if np.any(on_cut):
            raise BranchCutCrossing(
                f"c + i eta = {z[on_cut] if z.shape else z} lies on the negative real axis")
        out = np.sqrt(z)
        return out if out.shape else complex(out)

    def beta(self, eta, sign: int):
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        out = self.a + sign * self.gamma(eta)
        return out if np.asarray(out).shape else complex(out)

    def lam_raw(self, eta, sign: int, b2: float):
        """i eta (gamma(eta) + sign (3a - b2)), the raw channel arc."""
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        eta = np.asarray(eta, dtype=complex)
        out = 1j * eta * (self.gamma(eta) + sign * (3.0 * self.a - b2))
        return out if out.shape else complex(out)


def branch_of(config, pair: tuple[int, int]) -> Branch:
    return Branch(a=config.a_of(pair), c=config.c_of(pair))
