import numpy as np
import pytest

from flyqsim.dualrail import fredkin_circuit, logical_hadamard
from flyqsim.gates import (
    CompositeGate,
    CoulombCoupler,
    PhaseShifter,
    WaveguideCoupler,
)
from flyqsim.netlist import (
    Circuit,
    NetlistError,
    Segment,
    expand_composites,
    parse,
    parse_circuit,
    serialize,
)
from flyqsim.timing import SepSource

CANONICAL = """\
rails 3
sep q0 delay=0ps
sep q1 delay=0ps
sep q2 delay=0ps empty
bs q1 q2 lc=0.14um lt=0.28um
cc q0 q1 chit=1.5707963rad
bs q1 q2 lc=0.14um lt=0.28um
set q0
set q1
set q2
"""


def errors_of(result):
    return [(d.line, d.column, d.message) for d in result.diagnostics
            if d.severity == "error"]


def test_parse_canonical_topology():
    result = parse(CANONICAL)
    assert result.ok
    circuit = result.circuit
    assert circuit.n_rails == 3
    assert len(circuit.elements) == 3
    assert isinstance(circuit.elements[0], WaveguideCoupler)
    assert isinstance(circuit.elements[1], CoulombCoupler)
    assert circuit.elements[1].chi_t == pytest.approx(np.pi / 2, abs=1e-6)
    assert [s.emits for s in circuit.sources] == [True, True, False]
    assert circuit.detectors == [0, 1, 2]


def test_parse_rejects_degenerate_coupler():
    result = parse("rails 2\nbs q0 q0 lc=0.14um lt=0.28um\n")
    assert not result.ok
    (line, column, message), = errors_of(result)
    assert line == 2
    assert message == "coupler rails must be distinct"
    assert column == 7  # points at the repeated rail token


def test_parse_empty_input():
    result = parse("")
    assert not result.ok
    assert any("no rails declared" in m for _, _, m in errors_of(result))


def test_parse_statement_before_rails():
    result = parse("sep q0 delay=0ps\nrails 2\n")
    assert not result.ok
    assert errors_of(result)[0][0] == 1


def test_parse_requires_units():
    result = parse("rails 2\nsegment q0 1.5\nps q1 phi=0.5\n")
    assert not result.ok
    messages = [m for _, _, m in errors_of(result)]
    assert any("'um'" in m for m in messages)
    assert any("'rad'" in m for m in messages)


def test_parse_unknown_statement():
    result = parse("rails 1\nteleport q0\n")
    assert not result.ok
    assert "unknown statement 'teleport'" in errors_of(result)[0][2]


def test_parse_rail_identifier_rules():
    result = parse("rails 2\nset Q0\n")  # rail names are case-sensitive
    assert not result.ok
    result = parse("rails 2\nset q5\n")
    assert not result.ok
    assert "out of range" in errors_of(result)[0][2]


def test_parse_duplicate_source():
    result = parse("rails 1\nsep q0 delay=0ps\nsep q0 delay=1ps\n")
    assert not result.ok
    assert "duplicate source" in errors_of(result)[0][2]


def test_parse_duplicate_detector_warns():
    result = parse("rails 1\nset q0\nset q0\n")
    assert result.ok
    assert [d.severity for d in result.diagnostics] == ["warning"]
    assert result.circuit.detectors == [0]


def test_parse_rails_validation():
    assert not parse("rails 0\n").ok
    assert not parse("rails 25\n").ok
    assert not parse("rails 2\nrails 3\n").ok
    assert not parse("rails two\n").ok


def test_parse_negative_values_rejected():
    assert not parse("rails 1\nsegment q0 -1um\n").ok
    assert not parse("rails 1\nsep q0 delay=-2ps\n").ok
    assert not parse("rails 2\nbs q0 q1 lc=-0.1um lt=0.28um\n").ok
    assert not parse("rails 2\nbs q0 q1 lc=0.1um lt=0um\n").ok


def test_parse_macros():
    result = parse("rails 3\nhadamard q0 q1\nfredkin q0 q1 q2\n")
    assert result.ok
    assert result.circuit.elements == [
        CompositeGate("hadamard", (0, 1)),
        CompositeGate("fredkin", (0, 1, 2)),
    ]


def test_parse_macro_rail_collision():
    result = parse("rails 3\nfredkin q0 q1 q1\n")
    assert not result.ok
    assert "macro rails must be distinct" in errors_of(result)[0][2]


def test_parse_dualrail_collisions():
    result = parse("rails 4\ndualrail a q0 q1\ndualrail b q1 q2\n")
    assert not result.ok
    assert "already used by register 'a'" in errors_of(result)[0][2]
    assert not parse("rails 4\ndualrail a q0 q1\ndualrail a q2 q3\n").ok
    assert not parse("rails 2\ndualrail a q0 q0\n").ok


def test_parse_len_attribute():
    result = parse("rails 2\ncc q0 q1 chit=0.5rad len=0.9um\n")
    assert result.ok
    assert result.circuit.elements[0].length == pytest.approx(0.9)


def test_parse_strict_hardware_phases():
    text = "rails 1\nps q0 phi=-0.5rad\n"
    assert parse(text).ok
    strict = parse(text, strict_hardware_phases=True)
    assert not strict.ok
    assert "hardware range" in errors_of(strict)[0][2]


def test_parse_trailing_garbage():
    assert not parse("rails 1\nset q0 extra\n").ok
    assert not parse("rails 2\nsep q0 delay=0ps full\n").ok


def test_parse_comments_and_case():
    text = "# top comment\nRAILS 2  # inline\nSEP q0 DELAY=1.5ps\nSet q1\n"
    result = parse(text)
    assert result.ok
    assert result.circuit.sources == [SepSource(0, 1.5, True)]
    assert result.circuit.detectors == [1]


def test_parse_circuit_raises_on_errors():
    with pytest.raises(NetlistError):
        parse_circuit("rails 0\n")


# --- serialization -----------------------------------------------------------


def test_roundtrip_canonical():
    circuit = parse_circuit(CANONICAL)
    again = parse_circuit(serialize(circuit))
    assert again == circuit


def test_roundtrip_preserves_element_order_and_values():
    circuit = Circuit(
        n_rails=3,
        elements=[
            PhaseShifter(2, 0.123456789012345),
            WaveguideCoupler((0, 1), 0.14, 0.28, length=0.5),
            CoulombCoupler((2, 0), -1.7e-3),
        ],
        segments=[Segment(1, 2.25, 1), Segment(0, 1e-7, 3)],
        sources=[SepSource(0, 3.5), SepSource(2, 0.0, emits=False)],
        detectors=[2, 0],
        registers=[("pair", (0, 1))],
    )
    again = parse_circuit(serialize(circuit))
    assert again == circuit
    assert [type(e) for e in again.elements] == [type(e) for e in circuit.elements]
    assert again.elements[0].phi == circuit.elements[0].phi  # exact, not approx


def test_serialize_segment_interleaving():
    circuit = Circuit(
        n_rails=1,
        elements=[PhaseShifter(0, 0.5)],
        segments=[Segment(0, 1.0, 0), Segment(0, 2.0, 1)],
        sources=[SepSource(0, 0.0)],
    )
    text = serialize(circuit)
    lines = text.strip().splitlines()
    assert lines.index("segment q0 1.0um") < lines.index("ps q0 phi=0.5rad")
    assert lines.index("ps q0 phi=0.5rad") < lines.index("segment q0 2.0um")


# --- macro expansion ----------------------------------------------------------


def test_expand_fredkin_matches_synthesis():
    circuit = parse_circuit("rails 3\nfredkin q0 q1 q2\n")
    expanded = expand_composites(circuit)
    assert expanded.elements == fredkin_circuit(0, (1, 2))


def test_expand_hadamard_matches_synthesis():
    circuit = parse_circuit("rails 2\nhadamard q0 q1\n")
    expanded = expand_composites(circuit)
    assert expanded.elements == logical_hadamard((0, 1))


def test_expand_without_macros_is_identity():
    circuit = parse_circuit(CANONICAL)
    assert expand_composites(circuit) == circuit


def test_expand_remaps_segment_positions():
    text = ("rails 3\n"
            "segment q0 1.0um\n"
            "hadamard q0 q1\n"
            "segment q1 2.0um\n"
            "ps q2 phi=0.25rad\n"
            "segment q2 3.0um\n")
    expanded = expand_composites(parse_circuit(text))
    n_hadamard = len(logical_hadamard((0, 1)))
    assert [s.position for s in expanded.segments] == [
        0, n_hadamard, n_hadamard + 1]
    # round-trip still holds after expansion
    assert parse_circuit(serialize(expanded)) == expanded
