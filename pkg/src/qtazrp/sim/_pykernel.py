"""Pure-Python simulation kernel (fallback for the compiled extension).

Draw-for-draw compatible with the compiled kernel: trajectory ``i`` of a run
seeded with ``seed`` consumes the Philox4x64-10 stream with key = seed and
256-bit counter = i << 128, converting each raw 64-bit word to a uniform
double as (raw >> 11) * 2**-53.  Given identical draws, event selection and
particle bookkeeping follow the same deterministic order as the compiled
kernel, so both produce bit-identical trajectories.
"""

from __future__ import annotations

import math

import numpy as np

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


class _Stream:
    """Buffered uniform doubles from one Philox trajectory stream."""

    __slots__ = ("_bg", "_buf", "_pos")
    _CHUNK = 128

    def __init__(self, seed: int, index: int):
        self._bg = np.random.Philox(key=seed, counter=index << 128)
        self._buf = self._bg.random_raw(self._CHUNK)
        self._pos = 0

    def next_double(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._bg.random_raw(self._CHUNK)
            self._pos = 0
        v = int(self._buf[self._pos])
        self._pos += 1
        return (v >> 11) * _INV_2_53


def philox_raw(seed: int, index: int, n: int) -> np.ndarray:
    """First n raw 64-bit outputs of stream (seed, index); test hook."""
    bg = np.random.Philox(key=seed, counter=index << 128)
    return bg.random_raw(n)


def _evolve(positions: list, species: list, n_species: int, q: float,
            t: float, stream: _Stream) -> None:
    """Advance one trajectory to time t in place (Gillespie)."""
    npart = len(positions)
    if npart == 0 or t <= 0.0:
        return
    inv1mq = 1.0 / (1.0 - q)
    qpow = [1.0]
    for _ in range(npart):
        qpow.append(qpow[-1] * q)
    elapsed = 0.0
    while True:
        sites = sorted(set(positions))
        counts = {s: [0] * n_species for s in sites}
        for p, sp in zip(positions, species):
            counts[p][sp] += 1
        rates = []
        total = 0.0
        for s in sites:
            z = counts[s]
            prefix = 0
            for k in range(n_species):
                zk = z[k]
                r = 0.0 if zk == 0 else qpow[prefix] * (1.0 - qpow[zk]) * inv1mq
                rates.append(r)
                total += r
                prefix += zk
        if total <= 0.0:
            return
        u = stream.next_double()
        elapsed += -math.log1p(-u) / total
        if elapsed > t:
            return
        r = stream.next_double() * total
        cum = 0.0
        chosen = last = None
        i = 0
        for s in sites:
            for k in range(n_species):
                rate = rates[i]
                i += 1
                if rate > 0.0:
                    last = (s, k)
                    cum += rate
                    if r < cum:
                        chosen = (s, k)
                        break
            if chosen is not None:
                break
        if chosen is None:
            chosen = last
        s, k = chosen
        for j in range(npart):
            if positions[j] == s and species[j] == k:
                positions[j] += 1
                break


def _observable(positions: list, species: list, q: float,
                y1: int, y2: int) -> float:
    """Two-species duality observable on a particle-list configuration.

    Frozen conventions (weak counts, cyclic species shift): the height part
    counts species-0 particles left/right of y1, and the product factor for a
    species-i pile of z particles at x is (q^(1/2 - A - z); q)_z with
    A = #(same species strictly left of x) + [y_((i+1) mod 2 + 1) >= x + 1]
    (species 0 pairs with the dual at y2, species 1 with y1).
    """
    h = 0
    for pos, sp in zip(positions, species):
        if sp == 0:
            h += 1 if pos >= y1 else -1
    occ = {}
    for pos, sp in zip(positions, species):
        occ[(pos, sp)] = occ.get((pos, sp), 0) + 1
    prod = q ** (0.5 * h)
    for (x, i) in sorted(occ):
        z = occ[(x, i)]
        below = sum(1 for p, sp in zip(positions, species)
                    if sp == i and p < x)
        ydual = y2 if i == 0 else y1
        ind = 1 if ydual >= x + 1 else 0
        a = q ** (0.5 - (below + ind) - z)
        for _ in range(z):
            prod *= 1.0 - a
            a *= q
    return prod


def run_trajectory(positions, species, n_species: int, q: float, t: float,
                   seed: int, stream: int = 0):
    """One exact-in-law sample at time t; pure function of (seed, stream)."""
    pos = [int(p) for p in positions]
    sp = [int(s) for s in species]
    _evolve(pos, sp, n_species, q, t, _Stream(seed, stream))
    return (np.asarray(pos, dtype=np.int64), np.asarray(sp, dtype=np.int64))


def mc_duality(positions, species, q: float, t: float, y1: int, y2: int,
               samples: int, seed: int):
    """Welford accumulation of the duality observable over ``samples`` runs."""
    base_pos = [int(p) for p in positions]
    base_sp = [int(s) for s in species]
    count = 0
    mean = 0.0
    m2 = 0.0
    for i in range(samples):
        pos = base_pos.copy()
        sp = base_sp.copy()
        _evolve(pos, sp, 2, q, t, _Stream(seed, i))
        d = _observable(pos, sp, q, y1, y2)
        count += 1
        delta = d - mean
        mean += delta / count
        m2 += delta * (d - mean)
    return count, mean, m2


def final_positions_single(x0: int, q: float, t: float,
                           samples: int, seed: int) -> np.ndarray:
    """Final positions of a lone species-0 particle started at x0."""
    out = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        pos = [int(x0)]
        sp = [0]
        _evolve(pos, sp, 1, q, t, _Stream(seed, i))
        out[i] = pos[0]
    return out


def occupancy_moments(positions, species, n_species: int, q: float, t: float,
                      samples: int, seed: int, site_lo: int, site_hi: int):
    """Colorblind per-site occupancy sums: (sum n_x, sum n_x^2) per site."""
    width = site_hi - site_lo
    s1 = np.zeros(width)
    s2 = np.zeros(width)
    base_pos = [int(p) for p in positions]
    base_sp = [int(s) for s in species]
    for i in range(samples):
        pos = base_pos.copy()
        sp = base_sp.copy()
        _evolve(pos, sp, n_species, q, t, _Stream(seed, i))
        occ = [0] * width
        for p in pos:
            if site_lo <= p < site_hi:
                occ[p - site_lo] += 1
        for j in range(width):
            s1[j] += occ[j]
            s2[j] += occ[j] * occ[j]
    return s1, s2
