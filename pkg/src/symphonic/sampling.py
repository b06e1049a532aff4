"""Seeded low-discrepancy point sets over chart domain boxes."""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

DEFAULT_MARGIN = 0.1
DEFAULT_COUNT = 100


def sample_box(box, n, seed=0, margin=DEFAULT_MARGIN):
    """n scrambled-Halton points inside ``box``, pulled in by ``margin``
    (fraction of width per side).  Deterministic for a given seed."""
    shrunk = box.shrunk(margin)
    lo = np.array([b[0] for b in shrunk.bounds])
    hi = np.array([b[1] for b in shrunk.bounds])
    sampler = qmc.Halton(d=box.dim, scramble=True, seed=int(seed))
    unit = sampler.random(int(n))
    return lo + unit * (hi - lo)


def manifold_samples(manifold, n=DEFAULT_COUNT, seed=0, margin=DEFAULT_MARGIN):
    return sample_box(manifold.sampling_box(), n, seed, margin)
