"""Modal coefficient containers.

A :class:`DGField` stores one coefficient tensor per mesh block, indexed
``(cell, mode, variable)``.  Cell means are ``coef[:, 0, :] / sqrt(|C|)``.
Fields support the vector-space arithmetic used by the time integrators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class DGField:
    blocks: list

    def copy(self):
        return DGField([b.copy() for b in self.blocks])

    def zeros_like(self):
        return DGField([np.zeros_like(b) for b in self.blocks])

    def __add__(self, other):
        return DGField([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        return DGField([a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, s):
        return DGField([s * b for b in self.blocks])

    __rmul__ = __mul__

    def norm_inf(self):
        return max(float(np.max(np.abs(b))) if b.size else 0.0
                   for b in self.blocks)

    def allfinite(self):
        return all(np.all(np.isfinite(b)) for b in self.blocks)


@dataclass
class FluxTallies:
    """Surface-integral tallies per block: net outer-boundary flux and net
    interface flux of every variable, each with respect to the block's own
    outward normal.  The mode-(0,0) equations imply
    d/dt (total of U over block) = -(outer + interface)."""

    outer: list
    interface: list

    @classmethod
    def zeros(cls, nvars):
        return cls([np.zeros(nv) for nv in nvars], [np.zeros(nv) for nv in nvars])

    def __add__(self, other):
        return FluxTallies(
            [a + b for a, b in zip(self.outer, other.outer)],
            [a + b for a, b in zip(self.interface, other.interface)])

    def __mul__(self, s):
        return FluxTallies([s * a for a in self.outer],
                           [s * a for a in self.interface])

    __rmul__ = __mul__
