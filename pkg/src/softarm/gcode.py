"""Parser and formatter for the small G-Code dialect the arm executes.

The dialect drives both motion and grasping:

* ``G01 X.. Y.. Z..``  move; any subset of axes, missing ones stay put
* ``G01 P..``          set gripper pressure (gauge kPa); P never mixes with axes
* ``G04 P..``          dwell for an integer number of milliseconds

Comments run from ``;`` to end of line or sit inside parentheses.  Words
are case-insensitive; parsing and canonical formatting round-trip.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class Move:
    """Target position; ``None`` axes mean 'unchanged'."""

    x_mm: float | None = None
    y_mm: float | None = None
    z_mm: float | None = None


@dataclass(frozen=True)
class SetPressure:
    gauge_kpa: float


@dataclass(frozen=True)
class Dwell:
    ms: int


Instruction = Move | SetPressure | Dwell


@dataclass(frozen=True)
class Program:
    instructions: tuple[Instruction, ...]
    # source line number per instruction, for error reporting downstream
    line_nos: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.instructions)


_WORD_RE = re.compile(r"([A-Za-z])\s*([-+]?[0-9]*\.?[0-9]+)")
_PAREN_COMMENT_RE = re.compile(r"\(.*?\)")


def _strip_comments(line: str, line_no: int) -> str:
    line = line.split(";", 1)[0]
    line = _PAREN_COMMENT_RE.sub(" ", line)
    if "(" in line or ")" in line:
        raise ParseError(line_no, "unbalanced comment parenthesis")
    return line


def parse_line(line: str, line_no: int = 1) -> Instruction | None:
    """Parse one source line; returns None for blank/comment-only lines."""
    text = _strip_comments(line, line_no).strip()
    if not text:
        return None

    words: dict[str, float] = {}
    pos = 0
    for match in _WORD_RE.finditer(text):
        if text[pos : match.start()].strip():
            raise ParseError(line_no, f"unrecognized text {text[pos:match.start()].strip()!r}")
        letter = match.group(1).upper()
        if letter in words:
            raise ParseError(line_no, f"duplicate word {letter}")
        words[letter] = float(match.group(2))
        pos = match.end()
    if text[pos:].strip():
        raise ParseError(line_no, f"unrecognized text {text[pos:].strip()!r}")

    if "G" not in words:
        raise ParseError(line_no, "line has no G word")
    g = words.pop("G")
    for letter in words:
        if letter not in "XYZP":
            raise ParseError(line_no, f"unknown word {letter}")

    if g == 1:
        has_axes = any(a in words for a in "XYZ")
        if "P" in words:
            if has_axes:
                raise ParseError(line_no, "G01 cannot mix P with X/Y/Z")
            pressure = words["P"]
            if pressure < 0:
                raise ParseError(line_no, "pressure must be non-negative")
            return SetPressure(pressure)
        if not has_axes:
            raise ParseError(line_no, "G01 needs at least one of X/Y/Z or P")
        return Move(words.get("X"), words.get("Y"), words.get("Z"))
    if g == 4:
        if set(words) != {"P"}:
            raise ParseError(line_no, "G04 takes exactly a P word")
        ms = words["P"]
        if ms < 0 or ms != int(ms):
            raise ParseError(line_no, "dwell must be a non-negative integer of milliseconds")
        return Dwell(int(ms))
    raise ParseError(line_no, f"unknown G word G{g:g}")


def parse_program(text: str) -> Program:
    """Parse a whole program; fails on the first bad line."""
    instructions: list[Instruction] = []
    line_nos: list[int] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        instruction = parse_line(line, line_no)
        if instruction is not None:
            instructions.append(instruction)
            line_nos.append(line_no)
    return Program(tuple(instructions), tuple(line_nos))


def format_instruction(instruction: Instruction) -> str:
    """Render the canonical text form (3-decimal coordinates)."""
    if isinstance(instruction, Move):
        parts = ["G01"]
        for letter, value in (("X", instruction.x_mm), ("Y", instruction.y_mm), ("Z", instruction.z_mm)):
            if value is not None:
                parts.append(f"{letter}{value:.3f}")
        return " ".join(parts)
    if isinstance(instruction, SetPressure):
        return f"G01 P{instruction.gauge_kpa:.3f}"
    if isinstance(instruction, Dwell):
        return f"G04 P{instruction.ms}"
    raise TypeError(f"not an instruction: {instruction!r}")


def format_program(program: Program) -> str:
    return "\n".join(format_instruction(i) for i in program.instructions) + "\n"
