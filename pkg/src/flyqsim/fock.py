"""Occupation-number state engine for electrons on nanowire rails.

A register of ``n_rails`` single-mode rails is represented by a dense complex
amplitude vector over all 2^n occupation patterns.  Basis indexing convention
(fixed throughout the package, and the reference for every sign below):

* basis index ``mask``: bit ``i`` set  <=>  rail ``i`` occupied;
* the basis ket for ``mask`` is built by applying creation operators in
  increasing rail order, smallest rail index leftmost.

The second convention fixes the fermionic sign structure.  Moving a mode
operator past the creation operator of an occupied rail costs a factor -1, so
a two-rail mode unitary acting on non-adjacent rails picks up a sign
(-1)^k on its off-diagonal (hopping) amplitudes, where k counts occupied
rails strictly between the pair.  A doubly occupied pair transforms with
det(u).  Both rules are exercised against a dense second-quantized oracle in
the test suite.

All operations are pure: they return new states and never mutate their
inputs, so shots can be evaluated in parallel as long as each shot owns its
state copy and random stream.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from functools import lru_cache

import numpy as np

MAX_RAILS = 24
NORM_ATOL = 1e-10
MEASURE_NORM_ATOL = 1e-6
UNITARY_ATOL = 1e-10


class CapacityError(ValueError):
    """Raised when a register exceeds the dense-simulation capacity."""


def _check_n_rails(n_rails: int) -> None:
    if n_rails < 1:
        raise ValueError(f"n_rails must be >= 1, got {n_rails}")
    if n_rails > MAX_RAILS:
        raise CapacityError(
            f"n_rails = {n_rails} exceeds the dense state-vector capacity "
            f"of {MAX_RAILS} rails"
        )


@dataclass(eq=False, repr=False)
class OccupationState:
    """Complex amplitude vector over the 2^n_rails occupation basis.

    ``amplitudes[mask]`` is the amplitude of the pattern where bit ``i`` of
    ``mask`` marks rail ``i`` occupied.  Construction normally enforces unit
    norm to within ``NORM_ATOL``; pass ``normalized=False`` to skip the check
    while assembling a state by hand.
    """

    n_rails: int
    amplitudes: np.ndarray
    normalized: InitVar[bool] = True

    def __repr__(self) -> str:
        support = int(np.count_nonzero(self.amplitudes))
        return (f"OccupationState(n_rails={self.n_rails}, "
                f"norm={self.norm():.6g}, support={support})")

    def __post_init__(self, normalized: bool) -> None:
        _check_n_rails(self.n_rails)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_rails,):
            raise ValueError(
                f"amplitude vector must have length {1 << self.n_rails} "
                f"for {self.n_rails} rails, got shape {amps.shape}"
            )
        self.amplitudes = amps
        if normalized and abs(self.norm() - 1.0) > NORM_ATOL:
            raise ValueError(
                f"state norm {self.norm():.12g} deviates from 1 by more "
                f"than {NORM_ATOL:g}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_rails

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "OccupationState":
        return OccupationState(self.n_rails, self.amplitudes.copy(),
                               normalized=False)


def vacuum(n_rails: int) -> OccupationState:
    """All-rails-empty state: amplitude 1 on mask 0."""
    _check_n_rails(n_rails)
    amps = np.zeros(1 << n_rails, dtype=np.complex128)
    amps[0] = 1.0
    return OccupationState(n_rails, amps)


def prepare_occupation(n_rails: int, occupied) -> OccupationState:
    """Basis state with one electron on each rail in ``occupied``.

    Models pump-loaded inputs: each selected rail carries exactly one
    electron, every other rail is empty.
    """
    _check_n_rails(n_rails)
    mask = 0
    for rail in occupied:
        if not 0 <= rail < n_rails:
            raise ValueError(f"rail index {rail} out of range for "
                             f"{n_rails} rails")
        mask |= 1 << rail
    amps = np.zeros(1 << n_rails, dtype=np.complex128)
    amps[mask] = 1.0
    return OccupationState(n_rails, amps)


@lru_cache(maxsize=128)
def _mode_block_indices(n_rails: int, lo: int, hi: int):
    """Index arrays for a two-rail mode unitary on rails ``lo < hi``.

    Returns (m10, m01, m11, signs): masks with only ``lo`` occupied within
    the pair, their partners with only ``hi`` occupied, masks with both
    occupied, and the (-1)^k hopping signs from occupied rails strictly
    between the pair.
    """
    dim = 1 << n_rails
    masks = np.arange(dim, dtype=np.int64)
    lo_set = (masks >> lo) & 1
    hi_set = (masks >> hi) & 1
    m10 = masks[(lo_set == 1) & (hi_set == 0)]
    m01 = m10 ^ ((1 << lo) | (1 << hi))
    m11 = masks[(lo_set == 1) & (hi_set == 1)]
    between = ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1)
    parity = np.bitwise_count(m10 & between) & 1
    signs = 1.0 - 2.0 * parity.astype(np.float64)
    for arr in (m10, m01, m11, signs):
        arr.setflags(write=False)
    return m10, m01, m11, signs


@lru_cache(maxsize=128)
def rail_occupied_indices(n_rails: int, rail: int) -> np.ndarray:
    """Masks in which ``rail`` is occupied (cached, read-only)."""
    masks = np.arange(1 << n_rails, dtype=np.int64)
    idx = masks[((masks >> rail) & 1) == 1]
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=128)
def pair_occupied_indices(n_rails: int, rail_a: int, rail_b: int) -> np.ndarray:
    """Masks in which both rails are occupied (cached, read-only)."""
    masks = np.arange(1 << n_rails, dtype=np.int64)
    both = (((masks >> rail_a) & 1) == 1) & (((masks >> rail_b) & 1) == 1)
    idx = masks[both]
    idx.setflags(write=False)
    return idx


def _check_mode_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError(f"mode unitary must be 2x2, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(2)))
    if err > UNITARY_ATOL:
        raise ValueError(f"matrix is not unitary (deviation {err:.3g} "
                         f"exceeds {UNITARY_ATOL:g})")
    return u


def mode_unitary_batch(batch: np.ndarray, n_rails: int, rails, u: np.ndarray) -> None:
    """Apply a two-rail mode unitary to a (n_shots, 2^n) batch, in place.

    Single source of truth for the block update; ``apply_mode_unitary``
    wraps it for one state, the shot runner for many.
    """
    r0, r1 = rails
    if r0 > r1:
        # reorder so mode 0 is the lower rail; conjugate u by the swap
        r0, r1 = r1, r0
        u = u[::-1, ::-1]
    m10, m01, m11, signs = _mode_block_indices(n_rails, r0, r1)
    a = batch[:, m10]
    b = batch[:, m01]
    batch[:, m10] = u[0, 0] * a + (signs * u[0, 1]) * b
    batch[:, m01] = (signs * u[1, 0]) * a + u[1, 1] * b
    if m11.size:
        det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
        batch[:, m11] *= det


def apply_mode_unitary(state: OccupationState, rails, u) -> OccupationState:
    """Second-quantized action of a 2x2 mode unitary on a rail pair.

    ``u`` mixes the single-electron amplitudes of ``rails`` (first rail of
    the pair = first row/column of ``u``).  Components with both rails empty
    are untouched, components with both occupied pick up det(u), and hopping
    amplitudes between non-adjacent rails carry the (-1)^k sign for the k
    occupied rails strictly between the pair.  Electron number per basis
    component and total norm are preserved.
    """
    r0, r1 = rails
    if r0 == r1:
        raise ValueError(f"rail indices must be distinct, got ({r0}, {r1})")
    for r in (r0, r1):
        if not 0 <= r < state.n_rails:
            raise ValueError(f"rail index {r} out of range for "
                             f"{state.n_rails} rails")
    u = _check_mode_unitary(u)
    batch = state.amplitudes[np.newaxis, :].copy()
    mode_unitary_batch(batch, state.n_rails, (r0, r1), u)
    return OccupationState(state.n_rails, batch[0], normalized=False)


def apply_diagonal_phase(state: OccupationState, phase_of_mask) -> OccupationState:
    """Multiply each amplitude by exp(i * phase_of_mask(mask)).

    ``phase_of_mask`` is either a callable from basis mask to radians or a
    precomputed array of per-mask phases.  Norm is preserved exactly.
    """
    dim = state.dim
    if callable(phase_of_mask):
        phases = np.fromiter((float(phase_of_mask(m)) for m in range(dim)),
                             dtype=np.float64, count=dim)
    else:
        phases = np.asarray(phase_of_mask, dtype=np.float64)
        if phases.shape != (dim,):
            raise ValueError(f"phase array must have length {dim}, "
                             f"got shape {phases.shape}")
    return OccupationState(state.n_rails, state.amplitudes * np.exp(1j * phases),
                           normalized=False)


def sample_mask(probabilities: np.ndarray, rng_stream) -> int:
    """Draw one basis mask from a probability vector using one uniform."""
    cumulative = np.cumsum(probabilities)
    total = cumulative[-1]
    if total <= 0.0:
        raise ValueError("cannot sample from an all-zero probability vector")
    u = rng_stream.random() * total
    mask = int(np.searchsorted(cumulative, u, side="right"))
    return min(mask, len(probabilities) - 1)


def measure_all(state: OccupationState, rng_stream):
    """Projective occupation readout of every rail.

    Samples a basis mask with probability |amplitude|^2 and returns
    ``(mask, collapsed_state)``.  Mirrors single-shot electrometer detection:
    the post-measurement state is the sampled basis state.
    """
    norm = state.norm()
    if abs(norm - 1.0) > MEASURE_NORM_ATOL:
        raise ValueError(
            f"invalid state: norm {norm:.9g} deviates from 1 by more than "
            f"{MEASURE_NORM_ATOL:g}; normalize before measuring"
        )
    mask = sample_mask(state.probabilities(), rng_stream)
    collapsed = np.zeros(state.dim, dtype=np.complex128)
    collapsed[mask] = 1.0
    return mask, OccupationState(state.n_rails, collapsed)


def fidelity(a: OccupationState, b: OccupationState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.n_rails != b.n_rails:
        raise ValueError(f"rail count mismatch: {a.n_rails} vs {b.n_rails}")
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(abs(overlap) ** 2, 1.0))
