"""Gate primitives for single-electron rail circuits.

Three physical elements are modeled:

* ``PhaseShifter``: a biased quantum dot in one rail.  The occupied
  component of that rail gains exp(i*phi); vacuum is untouched.
* ``WaveguideCoupler``: two parallel waveguides with evanescent coupling
  over an interaction length ``coupling_length`` (um).  An electron
  oscillates between the rails with spatial period twice the
  ``transfer_length``; the matrix convention is

      [[cos(theta), i sin(theta)], [i sin(theta), cos(theta)]],
      theta = (pi/2) * coupling_length / transfer_length,

  so coupling_length = transfer_length gives complete transfer (|10> to
  i|01>) and half the transfer length gives a balanced 50/50 splitter.
  The i phase on the crossed amplitude is a convention choice; every
  composite that is sensitive to it compensates with explicit phase
  shifters.  A tunnelling-junction splitter is represented by the same
  matrix.
* ``CoulombCoupler``: two co-propagating rails interacting electrostatically
  for an angle ``chi_t`` = coupling constant x interaction time.  Only the
  doubly occupied component is affected, gaining exp(-2i*chi_t); the gate
  conserves electron number (mutual phase modulation, nothing else).

``build_dense_unitary`` provides the brute-force oracle: it assembles the
full 2^n x 2^n matrix from dense ladder operators and matrix exponentials,
deliberately avoiding the block-update path the engine uses, so the two can
be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from . import fock
from .fock import CapacityError, OccupationState

DEFAULT_TRANSFER_LENGTH_UM = 0.28
FIFTY_FIFTY_COUPLING_UM = DEFAULT_TRANSFER_LENGTH_UM / 2
MAX_DENSE_RAILS = 6

HARDWARE_PHASE_RANGE = (0.0, math.pi)


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def _check_optional_length(length):
    if length is None:
        return None
    length = float(length)
    if not math.isfinite(length) or length < 0.0:
        raise ValueError(f"element length must be finite and >= 0, got {length}")
    return length


@dataclass(frozen=True)
class PhaseShifter:
    """Quantum-dot phase shifter on one rail; ``phi`` in radians."""

    rail: int
    phi: float
    length: float | None = None

    def __post_init__(self):
        _require_finite("phi", self.phi)
        object.__setattr__(self, "length", _check_optional_length(self.length))

    @property
    def hardware_realizable(self) -> bool:
        """True when phi lies in the demonstrated dot-bias range (0, pi)."""
        lo, hi = HARDWARE_PHASE_RANGE
        return lo < self.phi < hi


@dataclass(frozen=True)
class WaveguideCoupler:
    """Evanescent coupler between two rails; lengths in um."""

    rails: tuple[int, int]
    coupling_length: float
    transfer_length: float = DEFAULT_TRANSFER_LENGTH_UM
    length: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rails", tuple(self.rails))
        if len(self.rails) != 2 or self.rails[0] == self.rails[1]:
            raise ValueError(f"coupler rails must be a distinct pair, "
                             f"got {self.rails}")
        if not (math.isfinite(self.coupling_length) and self.coupling_length >= 0.0):
            raise ValueError(f"coupling_length must be >= 0, "
                             f"got {self.coupling_length}")
        if not (math.isfinite(self.transfer_length) and self.transfer_length > 0.0):
            raise ValueError(f"transfer_length must be > 0, "
                             f"got {self.transfer_length}")
        object.__setattr__(self, "length", _check_optional_length(self.length))


@dataclass(frozen=True)
class CoulombCoupler:
    """Mutual phase modulation between two rails; ``chi_t`` in radians."""

    rails: tuple[int, int]
    chi_t: float
    length: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rails", tuple(self.rails))
        if len(self.rails) != 2 or self.rails[0] == self.rails[1]:
            raise ValueError(f"coupler rails must be a distinct pair, "
                             f"got {self.rails}")
        _require_finite("chi_t", self.chi_t)
        object.__setattr__(self, "length", _check_optional_length(self.length))


COMPOSITE_NAMES = ("hadamard", "fredkin")


@dataclass(frozen=True)
class CompositeGate:
    """Netlist macro placeholder, replaced by ``netlist.expand_composites``."""

    name: str
    rails: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rails", tuple(self.rails))
        if self.name not in COMPOSITE_NAMES:
            raise ValueError(f"unknown composite gate '{self.name}'")
        expected = 2 if self.name == "hadamard" else 3
        if len(self.rails) != expected:
            raise ValueError(f"composite '{self.name}' takes {expected} rails, "
                             f"got {len(self.rails)}")
        if len(set(self.rails)) != len(self.rails):
            raise ValueError(f"composite rails must be distinct, got {self.rails}")


PrimitiveElement = Union[PhaseShifter, WaveguideCoupler, CoulombCoupler]
GateElement = Union[PhaseShifter, WaveguideCoupler, CoulombCoupler, CompositeGate]


def rails_of(element: GateElement) -> tuple[int, ...]:
    if isinstance(element, PhaseShifter):
        return (element.rail,)
    return tuple(element.rails)


def element_keyword(element: GateElement) -> str:
    """Netlist keyword for an element (also used in reports)."""
    if isinstance(element, PhaseShifter):
        return "ps"
    if isinstance(element, WaveguideCoupler):
        return "bs"
    if isinstance(element, CoulombCoupler):
        return "cc"
    if isinstance(element, CompositeGate):
        return element.name
    raise TypeError(f"not a gate element: {element!r}")


def physical_length(element: GateElement) -> float:
    """Length in um the element contributes to every rail passing through.

    Explicit ``length`` wins; a waveguide coupler defaults to its coupling
    length; phase shifters and Coulomb couplers default to zero (the dot and
    the interaction region are not given a size unless declared).
    """
    if getattr(element, "length", None) is not None:
        return float(element.length)
    if isinstance(element, WaveguideCoupler):
        return float(element.coupling_length)
    return 0.0


def phase_shifter_matrix(phi: float) -> np.ndarray:
    """diag(1, e^{i phi}) on one rail's {empty, occupied} components."""
    phi = _require_finite("phi", phi)
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=np.complex128)


def coupler_angle(coupling_length: float, transfer_length: float) -> float:
    if not transfer_length > 0.0:
        raise ValueError(f"transfer_length must be > 0, got {transfer_length}")
    if coupling_length < 0.0:
        raise ValueError(f"coupling_length must be >= 0, got {coupling_length}")
    return (math.pi / 2.0) * (coupling_length / transfer_length)


def coupler_matrix(coupling_length: float, transfer_length: float) -> np.ndarray:
    """Mode unitary of a waveguide coupler.

    theta = (pi/2) L_c / L_t: theta = pi/2 transfers the electron completely,
    theta = pi/4 splits 50/50.  Interaction lengths are additive:
    coupler(L) @ coupler(L') = coupler(L + L') for a common transfer length.
    """
    theta = coupler_angle(coupling_length, transfer_length)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=np.complex128)


def coulomb_phase(chi_t: float) -> np.ndarray:
    """Diagonal action on an ordered rail pair's occupation basis.

    Returns the four diagonal entries over (|00>, |10>, |01>, |11>); only the
    doubly occupied component changes, by exp(-2i chi_t).  Symmetric under
    swapping the two rails.
    """
    chi_t = _require_finite("chi_t", chi_t)
    return np.array([1.0, 1.0, 1.0, np.exp(-2j * chi_t)], dtype=np.complex128)


def apply_element(state: OccupationState, element: GateElement) -> OccupationState:
    """Engine application of one element to a state (pure)."""
    batch = state.amplitudes[np.newaxis, :].copy()
    apply_element_batch(batch, state.n_rails, element)
    return OccupationState(state.n_rails, batch[0], normalized=False)


def apply_element_batch(batch: np.ndarray, n_rails: int, element: GateElement) -> None:
    """Apply one element to a (n_shots, 2^n) amplitude batch, in place."""
    for rail in rails_of(element):
        if not 0 <= rail < n_rails:
            raise ValueError(f"rail index {rail} out of range for "
                             f"{n_rails} rails")
    if isinstance(element, PhaseShifter):
        idx = fock.rail_occupied_indices(n_rails, element.rail)
        batch[:, idx] *= np.exp(1j * element.phi)
    elif isinstance(element, WaveguideCoupler):
        u = coupler_matrix(element.coupling_length, element.transfer_length)
        fock.mode_unitary_batch(batch, n_rails, element.rails, u)
    elif isinstance(element, CoulombCoupler):
        idx = fock.pair_occupied_indices(n_rails, *element.rails)
        batch[:, idx] *= np.exp(-2j * element.chi_t)
    elif isinstance(element, CompositeGate):
        raise ValueError(f"composite gate '{element.name}' must be expanded "
                         f"before simulation")
    else:
        raise TypeError(f"not a gate element: {element!r}")


@lru_cache(maxsize=256)
def _dense_ladder(n_rails: int, rail: int) -> np.ndarray:
    """Dense annihilation operator with the package's sign convention.

    Cached and marked read-only; consumers must not mutate the result.
    """
    dim = 1 << n_rails
    op = np.zeros((dim, dim), dtype=np.complex128)
    for mask in range(dim):
        if (mask >> rail) & 1:
            below = mask & ((1 << rail) - 1)
            sign = -1.0 if (bin(below).count("1") & 1) else 1.0
            op[mask ^ (1 << rail), mask] = sign
    op.setflags(write=False)
    return op


def build_dense_unitary(element: GateElement, n_rails: int) -> np.ndarray:
    """Full second-quantized matrix of one element, brute force.

    Assembled from dense ladder operators and matrix exponentials of the
    generating Hamiltonians, including all fermionic signs.  Intended as an
    independent oracle for the engine's block updates; capped at
    ``MAX_DENSE_RAILS`` rails.
    """
    if n_rails < 1:
        raise ValueError(f"n_rails must be >= 1, got {n_rails}")
    if n_rails > MAX_DENSE_RAILS:
        raise CapacityError(
            f"dense oracle capped at {MAX_DENSE_RAILS} rails, got {n_rails}"
        )
    for r in rails_of(element):
        if not 0 <= r < n_rails:
            raise ValueError(f"rail index {r} out of range for {n_rails} rails")
    dim = 1 << n_rails
    if isinstance(element, PhaseShifter):
        a = _dense_ladder(n_rails, element.rail)
        number = a.conj().T @ a
        diag = np.exp(1j * element.phi * np.diag(number).real)
        return np.diag(diag)
    if isinstance(element, WaveguideCoupler):
        theta = coupler_angle(element.coupling_length, element.transfer_length)
        a_p = _dense_ladder(n_rails, element.rails[0])
        a_q = _dense_ladder(n_rails, element.rails[1])
        hop = a_p.conj().T @ a_q + a_q.conj().T @ a_p
        # hop acts as a Pauli X on each single-electron pair block and as 0
        # on the empty/full blocks, so hop^3 = hop and exp(i theta hop)
        # closes after the quadratic term
        return (np.eye(dim, dtype=np.complex128)
                + 1j * math.sin(theta) * hop
                + (math.cos(theta) - 1.0) * (hop @ hop))
    if isinstance(element, CoulombCoupler):
        a_p = _dense_ladder(n_rails, element.rails[0])
        a_q = _dense_ladder(n_rails, element.rails[1])
        n_p = np.diag(a_p.conj().T @ a_p).real
        n_q = np.diag(a_q.conj().T @ a_q).real
        return np.diag(np.exp(-2j * element.chi_t * n_p * n_q))
    if isinstance(element, CompositeGate):
        raise ValueError(f"composite gate '{element.name}' has no dense form; "
                         f"expand it first")
    raise TypeError(f"not a gate element: {element!r}")
