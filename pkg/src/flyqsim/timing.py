"""Emission timing, coincidence checking, and shot-based sampling.

A pump on each rail launches (or withholds) one electron after a
programmable delay.  Electrons drift at a common group velocity, so the
arrival time at an element is the emission delay plus the accumulated
upstream path over the velocity; two-electron gates require the two
arrivals to coincide within a configurable window, and scheduling is
checked before any sampling run.

Dephasing is modeled per trajectory: in ``monte-carlo`` mode every declared
wire segment of length ``l`` adds an independent Gaussian random phase to
the occupied components of its rail, drawn per shot with variance
``l / l_phi``.  Two interferometer arms of length ``l`` then accumulate a
relative phase of variance ``2 l / l_phi``, which averages interference
fringes down by ``exp(-l / l_phi)``, the standard reading of a phase
coherence length.  ``deterministic-factor`` mode skips the noise and just
reports ``exp(-longest_rail_path / l_phi)`` alongside ideal sampling.

Reproducibility contract: shot ``i`` of a run draws from a dedicated stream
seeded by ``(master_seed, i)``, with a fixed draw order (one standard normal
per wire segment in declaration order, then one uniform for readout), so
serial and parallel evaluation produce identical histograms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .budget import rail_path_lengths
from .dualrail import LogicalOutcome, decode
from .gates import apply_element_batch, element_keyword, rails_of

DEFAULT_VELOCITY_UM_PS = 0.1
DEFAULT_WINDOW_PS = 1.0
DEFAULT_L_PHI_UM = 30.0

MODE_OFF = "off"
MODE_FACTOR = "deterministic-factor"
MODE_MC = "monte-carlo"
_MODE_ALIASES = {
    "off": MODE_OFF,
    "deterministic-factor": MODE_FACTOR,
    "factor": MODE_FACTOR,
    "monte-carlo": MODE_MC,
    "mc": MODE_MC,
}

_SHOT_CHUNK = 8192


class ConfigError(ValueError):
    """Circuit is not simulatable as configured (e.g. a gate rail lacks a source)."""


class CoincidenceError(RuntimeError):
    """Run refused because the schedule check failed."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"coincidence check failed: {lines}")


@dataclass(frozen=True)
class SepSource:
    """Single-electron pump: one electron (or none) after ``emission_delay`` ps."""

    rail: int
    emission_delay: float
    emits: bool = True

    def __post_init__(self):
        if self.emission_delay < 0:
            raise ValueError(f"emission_delay must be >= 0, "
                             f"got {self.emission_delay}")


@dataclass(frozen=True)
class PropagationModel:
    velocity: float = DEFAULT_VELOCITY_UM_PS          # um / ps
    coincidence_window: float = DEFAULT_WINDOW_PS     # ps

    def __post_init__(self):
        if not self.velocity > 0:
            raise ValueError(f"velocity must be > 0, got {self.velocity}")
        if not self.coincidence_window > 0:
            raise ValueError(f"coincidence_window must be > 0, "
                             f"got {self.coincidence_window}")


@dataclass(frozen=True)
class DephasingModel:
    l_phi: float = DEFAULT_L_PHI_UM                   # um
    mode: str = MODE_OFF

    def __post_init__(self):
        if not self.l_phi > 0:
            raise ValueError(f"l_phi must be > 0, got {self.l_phi}")
        mode = _MODE_ALIASES.get(str(self.mode).lower())
        if mode is None:
            raise ValueError(f"unknown dephasing mode '{self.mode}' "
                             f"(expected off, deterministic-factor, or monte-carlo)")
        object.__setattr__(self, "mode", mode)


@dataclass(frozen=True)
class ElementArrival:
    """Arrival times (ps) of each involved rail at one placed element."""

    element_index: int
    keyword: str
    rails: tuple[int, ...]
    times: dict

    def spread(self) -> float:
        values = list(self.times.values())
        return max(values) - min(values) if values else 0.0


@dataclass(frozen=True)
class CoincidenceViolation:
    element_index: int
    keyword: str
    rails: tuple[int, ...]
    times: dict
    delta: float

    def __str__(self) -> str:
        rails = " ".join(f"q{r}" for r in self.rails)
        arrivals = ", ".join(f"q{r}@{t:g}ps" for r, t in sorted(self.times.items()))
        return (f"element {self.element_index} ({self.keyword} {rails}): "
                f"|dt| = {self.delta:g} ps ({arrivals})")


@dataclass(frozen=True)
class ShotResult:
    mask: int
    logical: LogicalOutcome | None
    coherence_factor: float


@dataclass
class ShotHistogram:
    """Aggregated sampling run."""

    n_rails: int
    n_shots: int
    counts: dict                  # mask -> count, only nonzero entries
    logical_counts: dict | None   # outcome string -> count, when registers exist
    leak_count: int
    mean_coherence_factor: float
    shots: list = field(default_factory=list)  # ShotResult, only when requested

    def probability(self, mask: int) -> float:
        return self.counts.get(mask, 0) / self.n_shots


def arrival_times(circuit, model: PropagationModel | None = None,
                  sources=None) -> list[ElementArrival]:
    """Per-element, per-rail arrival table.

    Arrival at an element is the rail's emission delay plus the accumulated
    upstream declared wire divided by the velocity.  Element footprints are
    deliberately not counted here (gates are timing points; their lengths
    enter the coherence budget instead).  Every rail that reaches a gate
    must have a declared source.
    """
    model = model or PropagationModel()
    if sources is None:
        sources = circuit.sources
    delays = {src.rail: src.emission_delay for src in sources}
    traveled = dict.fromkeys(range(circuit.n_rails), 0.0)
    table = []
    for index, element in enumerate(circuit.elements):
        for seg in circuit.segments_at(index):
            traveled[seg.rail] += seg.length
        rails = rails_of(element)
        missing = [r for r in rails if r not in delays]
        if missing:
            names = ", ".join(f"q{r}" for r in missing)
            raise ConfigError(f"element {index} ({element_keyword(element)}) "
                              f"needs a source on {names}")
        times = {r: delays[r] + traveled[r] / model.velocity for r in rails}
        table.append(ElementArrival(index, element_keyword(element), rails, times))
    return table


def check_coincidence(table, window: float = DEFAULT_WINDOW_PS) -> list[CoincidenceViolation]:
    """Flag every multi-rail element whose arrivals differ by more than ``window``."""
    if not window > 0:
        raise ValueError(f"window must be > 0, got {window}")
    violations = []
    for entry in table:
        if len(entry.rails) < 2:
            continue
        delta = entry.spread()
        if delta > window:
            violations.append(CoincidenceViolation(
                entry.element_index, entry.keyword, entry.rails,
                dict(entry.times), delta))
    return violations


def _initial_amplitudes(circuit) -> np.ndarray:
    occupied = [src.rail for src in circuit.sources if src.emits]
    return fock.prepare_occupation(circuit.n_rails, occupied).amplitudes


def _sample_rows(batch_probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Row-wise inverse-CDF sampling; one uniform per row."""
    cumulative = np.cumsum(batch_probs, axis=1)
    totals = cumulative[:, -1:]
    draws = uniforms[:, np.newaxis] * totals
    masks = (cumulative < draws).sum(axis=1)
    return np.minimum(masks, batch_probs.shape[1] - 1)


def run_shots(circuit, n_shots: int,
              dephasing: DephasingModel | None = None,
              master_seed: int = 0,
              propagation: PropagationModel | None = None,
              allow_desync: bool = False,
              keep_shots: bool = False) -> ShotHistogram:
    """Sample ``n_shots`` detector readouts of a scheduled circuit.

    The schedule is checked first; violations abort with
    ``CoincidenceError`` unless ``allow_desync`` overrides.  Results are
    deterministic in ``master_seed`` (see module docstring for the stream
    contract).  ``keep_shots`` additionally records one ``ShotResult`` per
    shot; leave it off for large runs.
    """
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    if master_seed < 0:
        raise ValueError(f"master_seed must be >= 0, got {master_seed}")
    dephasing = dephasing or DephasingModel()
    propagation = propagation or PropagationModel()
    if circuit.has_composites():
        raise ConfigError("expand composite gates before simulation")

    table = arrival_times(circuit, propagation)
    violations = check_coincidence(table, propagation.coincidence_window)
    if violations and not allow_desync:
        raise CoincidenceError(violations)

    n_rails = circuit.n_rails
    dim = 1 << n_rails
    initial = _initial_amplitudes(circuit)

    if dephasing.mode == MODE_OFF:
        coherence = 1.0
    else:
        lengths = rail_path_lengths(circuit)
        longest = max(lengths) if len(lengths) else 0.0
        coherence = math.exp(-longest / dephasing.l_phi)

    register = circuit.dual_rail_register()

    mc = dephasing.mode == MODE_MC
    if mc:
        # (position, occupied-mask indices, phase std) per declared segment
        segment_plan = []
        for position in range(len(circuit.elements) + 1):
            for seg in circuit.segments_at(position):
                idx = fock.rail_occupied_indices(n_rails, seg.rail)
                segment_plan.append(
                    (position, idx, math.sqrt(seg.length / dephasing.l_phi)))
        n_draws = len(segment_plan)
    else:
        final = initial[np.newaxis, :].copy()
        for element in circuit.elements:
            apply_element_batch(final, n_rails, element)
        probs = np.abs(final[0]) ** 2

    total_counts = np.zeros(dim, dtype=np.int64)
    shots: list[ShotResult] = []

    # bound per-chunk memory to a few tens of MB for wide registers
    chunk = max(1, min(_SHOT_CHUNK, (1 << 22) // dim))
    for start in range(0, n_shots, chunk):
        size = min(chunk, n_shots - start)
        uniforms = np.empty(size)
        if mc:
            normals = np.empty((size, n_draws))
            for i in range(size):
                stream = np.random.default_rng([master_seed, start + i])
                if n_draws:
                    normals[i] = stream.standard_normal(n_draws)
                uniforms[i] = stream.random()
            batch = np.broadcast_to(initial, (size, dim)).copy()
            draw = 0
            plan = iter(segment_plan)
            next_seg = next(plan, None)
            for position in range(len(circuit.elements) + 1):
                while next_seg is not None and next_seg[0] == position:
                    _, idx, std = next_seg
                    phases = np.exp(1j * std * normals[:, draw])
                    batch[:, idx] *= phases[:, np.newaxis]
                    draw += 1
                    next_seg = next(plan, None)
                if position < len(circuit.elements):
                    apply_element_batch(batch, n_rails, circuit.elements[position])
            batch_probs = np.abs(batch) ** 2
        else:
            for i in range(size):
                stream = np.random.default_rng([master_seed, start + i])
                uniforms[i] = stream.random()
            batch_probs = np.broadcast_to(probs, (size, dim))
        masks = _sample_rows(batch_probs, uniforms)
        total_counts += np.bincount(masks, minlength=dim)
        if keep_shots:
            for mask in masks:
                logical = decode(int(mask), register) if register else None
                shots.append(ShotResult(int(mask), logical, coherence))

    counts = {int(m): int(c) for m, c in enumerate(total_counts) if c}
    logical_counts = None
    leak_count = 0
    if register is not None:
        logical_counts = {}
        for mask, count in counts.items():
            outcome = decode(mask, register)
            key = str(outcome)
            logical_counts[key] = logical_counts.get(key, 0) + count
            if outcome.has_leak:
                leak_count += count

    return ShotHistogram(
        n_rails=n_rails,
        n_shots=n_shots,
        counts=counts,
        logical_counts=logical_counts,
        leak_count=leak_count,
        mean_coherence_factor=coherence,
        shots=shots,
    )
