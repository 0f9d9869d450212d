# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulation kernel.

Implements the Philox4x64-10 counter-based generator (bit-compatible with
numpy's Philox: key = seed, counter = stream << 128, uniform doubles as
(raw >> 11) * 2**-53), Gillespie dynamics of the multi-species zero-range
process, and the two-species duality observable.  The pure-Python fallback
in _pykernel mirrors this module draw for draw.
"""

from libc.math cimport log1p, pow as cpow
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

import numpy as np

cdef extern from *:
    ctypedef unsigned long long uint128 "__uint128_t"

cdef uint64_t PHILOX_M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t PHILOX_M1 = 0xCA5A826395121157ULL
cdef uint64_t PHILOX_W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t PHILOX_W1 = 0xBB67AE8584CAA73BULL

cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef struct Stream:
    uint64_t ctr[4]
    uint64_t key[2]
    uint64_t buf[4]
    int pos


cdef inline void stream_init(Stream *s, uint64_t seed, uint64_t index) noexcept nogil:
    s.ctr[0] = 0
    s.ctr[1] = 0
    s.ctr[2] = index  # counter = index << 128
    s.ctr[3] = 0
    s.key[0] = seed
    s.key[1] = 0
    s.pos = 4  # forces a fresh block (counter pre-incremented like numpy)


cdef inline void philox_block(Stream *s) noexcept nogil:
    cdef uint64_t c0, c1, c2, c3, k0, k1, hi0, lo0, hi1, lo1
    cdef uint128 p0, p1
    cdef int r
    s.ctr[0] += 1
    if s.ctr[0] == 0:
        s.ctr[1] += 1
        if s.ctr[1] == 0:
            s.ctr[2] += 1
            if s.ctr[2] == 0:
                s.ctr[3] += 1
    c0 = s.ctr[0]; c1 = s.ctr[1]; c2 = s.ctr[2]; c3 = s.ctr[3]
    k0 = s.key[0]; k1 = s.key[1]
    for r in range(10):
        p0 = (<uint128>PHILOX_M0) * c0
        p1 = (<uint128>PHILOX_M1) * c2
        lo0 = <uint64_t>p0
        hi0 = <uint64_t>(p0 >> 64)
        lo1 = <uint64_t>p1
        hi1 = <uint64_t>(p1 >> 64)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 += PHILOX_W0
        k1 += PHILOX_W1
    s.buf[0] = c0; s.buf[1] = c1; s.buf[2] = c2; s.buf[3] = c3
    s.pos = 0


cdef inline uint64_t next_u64(Stream *s) noexcept nogil:
    if s.pos == 4:
        philox_block(s)
    cdef uint64_t v = s.buf[s.pos]
    s.pos += 1
    return v


cdef inline double next_double(Stream *s) noexcept nogil:
    return <double>(next_u64(s) >> 11) * INV_2_53


def philox_raw(seed, index, n):
    """First n raw 64-bit outputs of stream (seed, index); test hook."""
    cdef Stream s
    stream_init(&s, <uint64_t>seed, <uint64_t>index)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] view = out
    cdef Py_ssize_t i
    for i in range(n):
        view[i] = next_u64(&s)
    return out


cdef struct Work:
    int64_t *pos
    int64_t *sp
    int64_t *site_vals
    int64_t *counts      # nsites x n_species, row-major
    double *rates
    double *qpow
    int npart
    int n_species


cdef int work_alloc(Work *w, int npart, int n_species) noexcept nogil:
    w.npart = npart
    w.n_species = n_species
    w.pos = <int64_t*>malloc(npart * sizeof(int64_t))
    w.sp = <int64_t*>malloc(npart * sizeof(int64_t))
    w.site_vals = <int64_t*>malloc(npart * sizeof(int64_t))
    w.counts = <int64_t*>malloc(npart * n_species * sizeof(int64_t))
    w.rates = <double*>malloc(npart * n_species * sizeof(double))
    w.qpow = <double*>malloc((npart + 1) * sizeof(double))
    if (w.pos == NULL or w.sp == NULL or w.site_vals == NULL or
            w.counts == NULL or w.rates == NULL or w.qpow == NULL):
        return -1
    return 0


cdef void work_free(Work *w) noexcept nogil:
    free(w.pos); free(w.sp); free(w.site_vals)
    free(w.counts); free(w.rates); free(w.qpow)


cdef int build_sites(Work *w) noexcept nogil:
    # distinct sites ascending with per-species counts; returns nsites
    cdef int nsites = 0, found, ins, si, sj, k, p
    cdef int64_t x
    cdef int ns = w.n_species
    for p in range(w.npart):
        x = w.pos[p]
        found = -1
        for si in range(nsites):
            if w.site_vals[si] == x:
                found = si
                break
        if found == -1:
            ins = nsites
            for si in range(nsites):
                if w.site_vals[si] > x:
                    ins = si
                    break
            for sj in range(nsites, ins, -1):
                w.site_vals[sj] = w.site_vals[sj - 1]
                for k in range(ns):
                    w.counts[sj * ns + k] = w.counts[(sj - 1) * ns + k]
            w.site_vals[ins] = x
            for k in range(ns):
                w.counts[ins * ns + k] = 0
            found = ins
            nsites += 1
        w.counts[found * ns + w.sp[p]] += 1
    return nsites


cdef void evolve(Work *w, double q, double t, Stream *stream) noexcept nogil:
    cdef int nsites, si, k, p, i, prefix, chosen_site, chosen_k
    cdef int last_site, last_k
    cdef int64_t zk, s_val
    cdef double inv1mq = 1.0 / (1.0 - q)
    cdef double total, u, elapsed, r, cum, rate
    cdef int ns = w.n_species
    if w.npart == 0 or t <= 0.0:
        return
    w.qpow[0] = 1.0
    for p in range(w.npart):
        w.qpow[p + 1] = w.qpow[p] * q
    elapsed = 0.0
    while True:
        nsites = build_sites(w)
        total = 0.0
        i = 0
        for si in range(nsites):
            prefix = 0
            for k in range(ns):
                zk = w.counts[si * ns + k]
                if zk == 0:
                    rate = 0.0
                else:
                    rate = w.qpow[prefix] * (1.0 - w.qpow[zk]) * inv1mq
                w.rates[i] = rate
                total += rate
                prefix += <int>zk
                i += 1
        if total <= 0.0:
            return
        u = next_double(stream)
        elapsed += -log1p(-u) / total
        if elapsed > t:
            return
        r = next_double(stream) * total
        cum = 0.0
        chosen_site = -1
        chosen_k = -1
        last_site = -1
        last_k = -1
        i = 0
        for si in range(nsites):
            for k in range(ns):
                rate = w.rates[i]
                i += 1
                if rate > 0.0:
                    last_site = si
                    last_k = k
                    cum += rate
                    if r < cum:
                        chosen_site = si
                        chosen_k = k
                        break
            if chosen_site >= 0:
                break
        if chosen_site < 0:
            chosen_site = last_site
            chosen_k = last_k
        s_val = w.site_vals[chosen_site]
        for p in range(w.npart):
            if w.pos[p] == s_val and w.sp[p] == chosen_k:
                w.pos[p] += 1
                break


cdef double observable(Work *w, double q, int64_t y1, int64_t y2) noexcept nogil:
    # two-species duality observable; weak counts, cyclic species shift
    cdef int h = 0, p, si, k, j, nsites, ind
    cdef int64_t x, z, ydual
    cdef double prod, a
    cdef int ns = w.n_species
    cdef int64_t below0, below1, below
    for p in range(w.npart):
        if w.sp[p] == 0:
            h += 1 if w.pos[p] >= y1 else -1
    prod = cpow(q, 0.5 * h)
    nsites = build_sites(w)
    below0 = 0
    below1 = 0
    for si in range(nsites):
        x = w.site_vals[si]
        for k in range(ns):
            z = w.counts[si * ns + k]
            if z == 0:
                continue
            below = below0 if k == 0 else below1
            ydual = y2 if k == 0 else y1
            ind = 1 if ydual >= x + 1 else 0
            a = cpow(q, 0.5 - <double>(below + ind) - <double>z)
            for j in range(z):
                prod *= 1.0 - a
                a *= q
        below0 += w.counts[si * ns + 0]
        if ns > 1:
            below1 += w.counts[si * ns + 1]
    return prod


cdef void load_state(Work *w, int64_t[::1] positions, int64_t[::1] species) noexcept nogil:
    cdef int p
    for p in range(w.npart):
        w.pos[p] = positions[p]
        w.sp[p] = species[p]


def run_trajectory(positions, species, n_species, q, t, seed, stream=0):
    """One exact-in-law sample at time t; pure function of (seed, stream)."""
    pos_in = np.ascontiguousarray(positions, dtype=np.int64)
    sp_in = np.ascontiguousarray(species, dtype=np.int64)
    cdef int64_t[::1] pv = pos_in
    cdef int64_t[::1] sv = sp_in
    cdef int npart = pos_in.shape[0]
    cdef Work w
    cdef Stream s
    if work_alloc(&w, max(npart, 1), int(n_species)) != 0:
        raise MemoryError
    try:
        load_state(&w, pv, sv)
        stream_init(&s, <uint64_t>seed, <uint64_t>stream)
        evolve(&w, q, t, &s)
        out_pos = np.empty(npart, dtype=np.int64)
        out_sp = np.empty(npart, dtype=np.int64)
        for p in range(npart):
            out_pos[p] = w.pos[p]
            out_sp[p] = w.sp[p]
        return out_pos, out_sp
    finally:
        work_free(&w)


def mc_duality(positions, species, q, t, y1, y2, samples, seed):
    """Welford accumulation of the duality observable over ``samples`` runs."""
    pos_in = np.ascontiguousarray(positions, dtype=np.int64)
    sp_in = np.ascontiguousarray(species, dtype=np.int64)
    cdef int64_t[::1] pv = pos_in
    cdef int64_t[::1] sv = sp_in
    cdef int npart = pos_in.shape[0]
    cdef Work w
    cdef Stream s
    cdef long ns = samples
    cdef uint64_t seed_ = <uint64_t>seed
    cdef int64_t y1_ = y1, y2_ = y2
    cdef double q_ = q, t_ = t
    cdef long i, count = 0
    cdef double mean = 0.0, m2 = 0.0, d, delta
    if work_alloc(&w, max(npart, 1), 2) != 0:
        raise MemoryError
    try:
        with nogil:
            for i in range(ns):
                load_state(&w, pv, sv)
                stream_init(&s, seed_, <uint64_t>i)
                evolve(&w, q_, t_, &s)
                d = observable(&w, q_, y1_, y2_)
                count += 1
                delta = d - mean
                mean += delta / count
                m2 += delta * (d - mean)
        return count, mean, m2
    finally:
        work_free(&w)


def final_positions_single(x0, q, t, samples, seed):
    """Final positions of a lone species-0 particle started at x0."""
    out = np.empty(samples, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef Work w
    cdef Stream s
    cdef long i, ns = samples
    cdef uint64_t seed_ = <uint64_t>seed
    cdef double q_ = q, t_ = t
    cdef int64_t x0_ = x0
    if work_alloc(&w, 1, 1) != 0:
        raise MemoryError
    try:
        with nogil:
            for i in range(ns):
                w.pos[0] = x0_
                w.sp[0] = 0
                stream_init(&s, seed_, <uint64_t>i)
                evolve(&w, q_, t_, &s)
                ov[i] = w.pos[0]
        return out
    finally:
        work_free(&w)


def occupancy_moments(positions, species, n_species, q, t, samples, seed,
                      site_lo, site_hi):
    """Colorblind per-site occupancy sums: (sum n_x, sum n_x^2) per site."""
    pos_in = np.ascontiguousarray(positions, dtype=np.int64)
    sp_in = np.ascontiguousarray(species, dtype=np.int64)
    cdef int64_t[::1] pv = pos_in
    cdef int64_t[::1] sv = sp_in
    cdef int npart = pos_in.shape[0]
    cdef int64_t lo = site_lo, hi = site_hi
    cdef int width = <int>(hi - lo)
    s1 = np.zeros(width)
    s2 = np.zeros(width)
    occ = np.zeros(width, dtype=np.int64)
    cdef double[::1] s1v = s1
    cdef double[::1] s2v = s2
    cdef int64_t[::1] occv = occ
    cdef Work w
    cdef Stream s
    cdef long i, ns = samples
    cdef uint64_t seed_ = <uint64_t>seed
    cdef double q_ = q, t_ = t
    cdef int nsp = int(n_species)
    cdef int p, j
    if work_alloc(&w, max(npart, 1), nsp) != 0:
        raise MemoryError
    try:
        with nogil:
            for i in range(ns):
                load_state(&w, pv, sv)
                stream_init(&s, seed_, <uint64_t>i)
                evolve(&w, q_, t_, &s)
                for j in range(width):
                    occv[j] = 0
                for p in range(w.npart):
                    if lo <= w.pos[p] < hi:
                        occv[w.pos[p] - lo] += 1
                for j in range(width):
                    s1v[j] += occv[j]
                    s2v[j] += <double>(occv[j] * occv[j])
        return s1, s2
    finally:
        work_free(&w)
