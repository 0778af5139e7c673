"""Deterministic quasi-random sample points (Halton sequence)."""
from __future__ import annotations

import numpy as np

_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
    53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
)


def _radical_inverse(index, base):
    out, f = 0.0, 1.0 / base
    while index > 0:
        out += f * (index % base)
        index //= base
        f /= base
    return out


def halton(count, dim):
    """First `count` Halton points in [0,1)^dim (index starts at 1; seedless)."""
    if dim > len(_PRIMES):
        raise ValueError(f"halton supports at most {len(_PRIMES)} dimensions")
    pts = np.empty((count, dim))
    for j in range(dim):
        base = _PRIMES[j]
        for i in range(count):
            pts[i, j] = _radical_inverse(i + 1, base)
    return pts


def sample_box(names, count=100, box=None):
    """Halton points over a per-variable box, as a list of name->value dicts.

    box maps a variable name to (lo, hi); unnamed variables get (-1, 1).
    """
    names = list(names)
    pts = halton(count, len(names))
    lo = np.array([(box or {}).get(nm, (-1.0, 1.0))[0] for nm in names])
    hi = np.array([(box or {}).get(nm, (-1.0, 1.0))[1] for nm in names])
    scaled = lo + pts * (hi - lo)
    return [dict(zip(names, row)) for row in scaled]
