"""Program parsing, formatting, and their round trip."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from golden_programs import MALFORMED, VALID
from softarm.gcode import (
    Dwell,
    Move,
    ParseError,
    Program,
    SetPressure,
    format_instruction,
    format_program,
    parse_line,
    parse_program,
)


@pytest.mark.parametrize("text,expected", VALID, ids=range(len(VALID)))
def test_golden_program(text, expected):
    program = parse_program(text)
    assert list(zip(program.instructions, program.line_nos)) == expected


@pytest.mark.parametrize("text,line_no,fragment", MALFORMED, ids=range(len(MALFORMED)))
def test_malformed_program(text, line_no, fragment):
    with pytest.raises(ParseError) as info:
        parse_program(text)
    assert info.value.line_no == line_no
    assert fragment in info.value.reason
    assert str(info.value).startswith(f"line {line_no}:")


def test_parse_line_blank_and_comment():
    assert parse_line("") is None
    assert parse_line("   ; nothing here") is None
    assert parse_line("(only a note)") is None


def test_parse_line_reports_given_line_number():
    with pytest.raises(ParseError) as info:
        parse_line("G09", line_no=42)
    assert info.value.line_no == 42


def test_format_canonical_forms():
    assert format_instruction(Move(1.0, None, -2.5)) == "G01 X1.000 Z-2.500"
    assert format_instruction(SetPressure(35.0)) == "G01 P35.000"
    assert format_instruction(Dwell(250)) == "G04 P250"


def test_format_program_ends_with_newline():
    text = format_program(parse_program("G01 X1\nG04 P5\n"))
    assert text == "G01 X1.000\nG04 P5\n"


# values on the canonical 3-decimal grid, where formatting is lossless
mm = st.integers(-300_000, 300_000).map(lambda n: n / 1000.0)
kpa = st.integers(0, 58_700).map(lambda n: n / 1000.0)

instruction = st.one_of(
    st.builds(
        Move,
        st.none() | mm,
        st.none() | mm,
        st.none() | mm,
    ).filter(lambda m: (m.x_mm, m.y_mm, m.z_mm) != (None, None, None)),
    st.builds(SetPressure, kpa),
    st.builds(Dwell, st.integers(0, 10_000_000)),
)


@settings(max_examples=500, deadline=None)
@given(st.lists(instruction, max_size=20))
def test_format_parse_round_trip(instructions):
    original = Program(tuple(instructions), tuple(range(1, len(instructions) + 1)))
    program = parse_program(format_program(original))
    assert program.instructions == original.instructions
    # formatting the reparse reproduces the text too
    assert format_program(program) == format_program(original)


def test_round_trip_bulk_seeded():
    rng = random.Random(20260822)
    for _ in range(1000):
        kind = rng.randrange(3)
        if kind == 0:
            axes = [rng.randint(-300_000, 300_000) / 1000.0 for _ in range(3)]
            keep = rng.randrange(1, 8)  # at least one axis present
            original = Move(*(v if keep >> i & 1 else None for i, v in enumerate(axes)))
        elif kind == 1:
            original = SetPressure(rng.randint(0, 58_700) / 1000.0)
        else:
            original = Dwell(rng.randint(0, 10_000_000))
        assert parse_line(format_instruction(original)) == original
