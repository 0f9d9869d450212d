"""Particle-system types, the duality observable, and Monte Carlo estimation.

The process state is a map site -> per-species occupation counts; dynamics
are totally asymmetric (every jump is one step right) with zero-range rates:
if a site holds z_k particles of species k (species 0 has highest priority),
one species-k particle leaves at rate q^(z_0+...+z_(k-1)) * (1-q^z_k)/(1-q).

Convention notes (these came out of cross-checks, not from a definition that
fixes them uniquely; the t = 0 contract against the exact six-term value and
the Monte Carlo suite arbitrate, and the alternatives fail):
  * N+_x counts sites >= x and N-_x counts sites <= x (weak inequalities);
  * the dual species shift is cyclic: slot i+1 of the shifted dual reads
    dual species (i+1) mod 2, so the observable pairs forward species 0
    with the dual particle at y2 and forward species 1 with y1.  (The
    height pairing h uses the dual configuration directly, unshifted.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..specfun import q_pochhammer
from ._select import HAVE_COMPILED, kernel

__all__ = [
    "MultiSpeciesConfig",
    "DualPair",
    "McEstimate",
    "jump_rates",
    "gillespie_run",
    "n_plus",
    "n_minus",
    "height_h",
    "duality_observable",
    "mc_estimate",
    "colorblind_projection",
    "displacement_samples",
    "occupancy_moment_sums",
    "HAVE_COMPILED",
]


@dataclass(frozen=True)
class MultiSpeciesConfig:
    """Finite particle configuration: site -> tuple of per-species counts."""

    occupancy: dict
    species_count: int

    def __post_init__(self):
        for site, counts in self.occupancy.items():
            if len(counts) != self.species_count:
                raise ParameterError(
                    f"site {site} has {len(counts)} species slots, "
                    f"expected {self.species_count}")
            if any(c < 0 for c in counts):
                raise ParameterError(f"negative count at site {site}")

    @staticmethod
    def from_sites(entries: dict, species_count: int) -> "MultiSpeciesConfig":
        occ = {int(site): tuple(int(c) for c in counts)
               for site, counts in entries.items()
               if any(counts)}
        return MultiSpeciesConfig(occ, species_count)

    @staticmethod
    def from_particles(positions, species, species_count: int) -> "MultiSpeciesConfig":
        occ: dict = {}
        for pos, sp in zip(positions, species):
            counts = occ.setdefault(int(pos), [0] * species_count)
            counts[int(sp)] += 1
        return MultiSpeciesConfig(
            {s: tuple(c) for s, c in occ.items()}, species_count)

    def to_particles(self):
        positions, species = [], []
        for site in sorted(self.occupancy):
            for sp, count in enumerate(self.occupancy[site]):
                positions.extend([site] * count)
                species.extend([sp] * count)
        return (np.asarray(positions, dtype=np.int64),
                np.asarray(species, dtype=np.int64))

    def particle_count(self) -> int:
        return sum(sum(c) for c in self.occupancy.values())

    def count(self, site: int, sp: int) -> int:
        return self.occupancy.get(site, (0,) * self.species_count)[sp]

    def translated(self, shift: int) -> "MultiSpeciesConfig":
        return MultiSpeciesConfig(
            {s + shift: c for s, c in self.occupancy.items()},
            self.species_count)


@dataclass(frozen=True)
class DualPair:
    """Dual configuration: one species-0 particle at y1, one species-1 at y2.

    Fixed in time; only the forward configuration evolves.
    """

    y1: int
    y2: int

    def translated(self, shift: int) -> "DualPair":
        return DualPair(self.y1 + shift, self.y2 + shift)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int


def jump_rates(site_counts, q: float) -> list:
    """Departure rate per species class at one site.

    Species k leaves at rate q^(z_0+...+z_(k-1)) * (1 - q^z_k) / (1 - q);
    zero when z_k = 0.  Lower species indices suppress higher ones.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie in (0,1), got {q}")
    rates = []
    prefix = 0
    for zk in site_counts:
        if zk < 0:
            raise ParameterError("negative occupation count")
        rate = 0.0 if zk == 0 else q**prefix * (1.0 - q**zk) / (1.0 - q)
        rates.append(rate)
        prefix += zk
    return rates


def gillespie_run(initial: MultiSpeciesConfig, t: float, rng_seed: int,
                  q: float = 0.5, stream: int = 0) -> MultiSpeciesConfig:
    """Exact-in-law sample of the process at time t.

    Deterministic given (rng_seed, stream): trajectory randomness comes from
    a counter-based generator keyed on the seed with the stream index in the
    counter's high bits, so trajectories are pure functions of (seed, stream).
    """
    if t < 0.0:
        raise ParameterError("t must be nonnegative")
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie in (0,1), got {q}")
    positions, species = initial.to_particles()
    pos, sp = kernel.run_trajectory(positions, species, initial.species_count,
                                    q, t, rng_seed, stream)
    return MultiSpeciesConfig.from_particles(pos, sp, initial.species_count)


def n_plus(config: MultiSpeciesConfig, species_lo: int, species_hi: int,
           x: int, strict: bool = False) -> int:
    """Count of particles with species in [species_lo, species_hi] at
    sites >= x (weak; ``strict=True`` uses > x, kept only for the
    convention-arbitration tests)."""
    total = 0
    for site, counts in config.occupancy.items():
        if (site > x) if strict else (site >= x):
            total += sum(counts[species_lo:species_hi + 1])
    return total


def n_minus(config: MultiSpeciesConfig, species_lo: int, species_hi: int,
            x: int, strict: bool = False) -> int:
    """Mirror of n_plus over sites <= x (or < x when ``strict``)."""
    total = 0
    for site, counts in config.occupancy.items():
        if (site < x) if strict else (site <= x):
            total += sum(counts[species_lo:species_hi + 1])
    return total


def height_h(xi: MultiSpeciesConfig, eta: DualPair, q: float,
             strict_counts: bool = False) -> int:
    """Height pairing h(xi, eta) for the two-species observable.

    For n = 2 only species 0 contributes:
    h = sum_x (-xi_0^x * [y1 >= x+1]) + N+_{y1}(xi_0).
    """
    if xi.species_count != 2:
        raise ParameterError("height_h requires a 2-species configuration")
    h = 0
    for site, counts in xi.occupancy.items():
        z0 = counts[0]
        if strict_counts:
            h += -z0 if site + 1 < eta.y1 else 0
        else:
            h += -z0 if eta.y1 >= site + 1 else 0
    h += n_plus(xi, 0, 0, eta.y1, strict=strict_counts)
    return h


def duality_observable(xi: MultiSpeciesConfig, eta: DualPair, q: float,
                       species_shift: str = "cyclic",
                       strict_counts: bool = False) -> float:
    """Duality functional D(xi, eta) = q^(h/2) * product of q-series factors.

    Each occupied (site x, species i) with z particles contributes
    (q^(1/2 - A - z); q)_z where A = N-_{x-1}(xi_i) + N+_{x+1}(shifted dual
    species i+1).  With the frozen cyclic shift, slot i+1 of the shifted
    dual is the dual's species (i+1) mod 2: an indicator [y2 >= x+1] for
    forward species 0 and [y1 >= x+1] for forward species 1.  Unoccupied
    sites contribute factor 1.  ``species_shift="direct"`` keeps the
    identity pairing and exists for the arbitration tests only.
    """
    if xi.species_count != 2:
        raise ParameterError("duality_observable requires 2 species")
    if species_shift not in ("cyclic", "direct"):
        raise ParameterError(f"unknown species shift {species_shift!r}")
    h = height_h(xi, eta, q, strict_counts=strict_counts)
    prod = q ** (0.5 * h)
    duals = (eta.y2, eta.y1) if species_shift == "cyclic" else (eta.y1, eta.y2)
    for site in sorted(xi.occupancy):
        counts = xi.occupancy[site]
        for i, z in enumerate(counts):
            if z == 0:
                continue
            below = n_minus(_species_slice(xi, i), 0, 0, site - 1,
                            strict=strict_counts)
            ind = 1 if duals[i] >= site + 1 else 0
            prod *= q_pochhammer(q ** (0.5 - (below + ind) - z), q, z)
    return prod


def _species_slice(config: MultiSpeciesConfig, i: int) -> MultiSpeciesConfig:
    return MultiSpeciesConfig(
        {s: (c[i],) for s, c in config.occupancy.items() if c[i]},
        1)


def colorblind_projection(config: MultiSpeciesConfig) -> MultiSpeciesConfig:
    """Forget species labels: per-site totals as a single-species state."""
    return MultiSpeciesConfig(
        {s: (sum(c),) for s, c in config.occupancy.items() if sum(c)}, 1)


def mc_estimate(params, eta: DualPair, samples: int, seed: int) -> McEstimate:
    """Monte Carlo mean of the duality observable at time params.t.

    Trajectory i consumes the (seed, i) random stream, so the estimate is
    reproducible and independent of execution order.
    """
    if samples < 2:
        raise ParameterError("need at least 2 samples")
    initial = initial_config(params)
    positions, species = initial.to_particles()
    count, mean, m2 = kernel.mc_duality(positions, species, params.q,
                                        params.t, eta.y1, eta.y2,
                                        samples, seed)
    stderr = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
    return McEstimate(mean, stderr, count, seed)


def initial_config(params) -> MultiSpeciesConfig:
    """n1 species-0 particles at x1 and n2 species-1 particles at x2."""
    return MultiSpeciesConfig.from_sites(
        {params.x1: (params.n1, 0), params.x2: (0, params.n2)}, 2)


def displacement_samples(x0: int, q: float, t: float,
                         samples: int, seed: int) -> np.ndarray:
    """Displacements of a lone particle after time t, one per stream."""
    finals = kernel.final_positions_single(x0, q, t, samples, seed)
    return finals - x0


def occupancy_moment_sums(initial: MultiSpeciesConfig, q: float, t: float,
                          samples: int, seed: int,
                          site_lo: int, site_hi: int):
    """Colorblind occupancy moment sums over [site_lo, site_hi)."""
    positions, species = initial.to_particles()
    return kernel.occupancy_moments(positions, species,
                                    initial.species_count, q, t,
                                    samples, seed, site_lo, site_hi)
