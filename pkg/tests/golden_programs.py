"""Golden program corpus: source text with the expected parse results.

``VALID`` maps program text to the expected (instruction, line_no)
pairs; ``MALFORMED`` maps program text to the line number that must be
reported and a fragment of the reason.
"""

from softarm.gcode import Dwell, Move, SetPressure

VALID = [
    (
        "G01 X10.000 Y20.000 Z30.000\n",
        [(Move(10.0, 20.0, 30.0), 1)],
    ),
    (
        "G01 X-5.25\n",
        [(Move(-5.25, None, None), 1)],
    ),
    (
        "G01 Y+7.5\n",
        [(Move(None, 7.5, None), 1)],
    ),
    (
        "G01 Z140\n",
        [(Move(None, None, 140.0), 1)],
    ),
    (
        "G01 P35.000\n",
        [(SetPressure(35.0), 1)],
    ),
    (
        "G01 P0\n",
        [(SetPressure(0.0), 1)],
    ),
    (
        "G04 P250\n",
        [(Dwell(250), 1)],
    ),
    (
        "G04 P0\n",
        [(Dwell(0), 1)],
    ),
    (
        "",
        [],
    ),
    (
        "; a header comment\n\n   \n(standalone note)\n",
        [],
    ),
    (
        "G01 X1.5 ; trailing comment\n",
        [(Move(1.5, None, None), 1)],
    ),
    (
        "G01 (inline note) X2.5 Y3.5\n",
        [(Move(2.5, 3.5, None), 1)],
    ),
    (
        "g01 x4 y5 z6\n",
        [(Move(4.0, 5.0, 6.0), 1)],
    ),
    (
        "G01X1.5Y-2Z.5\n",
        [(Move(1.5, -2.0, 0.5), 1)],
    ),
    (
        "G 1 X 5\n",
        [(Move(5.0, None, None), 1)],
    ),
    (
        "  G01 Z9.125  \n",
        [(Move(None, None, 9.125), 1)],
    ),
    (
        "G01 X200 Y0 Z80\nG01 Z30\nG01 P35\nG01 Z120\n",
        [
            (Move(200.0, 0.0, 80.0), 1),
            (Move(None, None, 30.0), 2),
            (SetPressure(35.0), 3),
            (Move(None, None, 120.0), 4),
        ],
    ),
    (
        "; approach\nG01 X150 Y150\n; pause\nG04 P1000\nG01 P12.5\n",
        [
            (Move(150.0, 150.0, None), 2),
            (Dwell(1000), 4),
            (SetPressure(12.5), 5),
        ],
    ),
    (
        "G01 Y-0.001\n",
        [(Move(None, -0.001, None), 1)],
    ),
    (
        "G01 Z50\r\nG04 P10\r\n",
        [(Move(None, None, 50.0), 1), (Dwell(10), 2)],
    ),
    (
        "(pick)(then)(place) G01 X33.333\n",
        [(Move(33.333, None, None), 1)],
    ),
    (
        "G01 P58.7\nG01 P0.000\n",
        [(SetPressure(58.7), 1), (SetPressure(0.0), 2)],
    ),
]

MALFORMED = [
    ("G01\n", 1, "at least one"),
    ("G01 X1 P2\n", 1, "mix"),
    ("G01 X1 X2\n", 1, "duplicate word X"),
    ("G01 P-5\n", 1, "non-negative"),
    ("G01 Q5\n", 1, "unknown word Q"),
    ("G04 P2.5\n", 1, "integer"),
    ("G04 P-1\n", 1, "integer"),
    ("G04 X1\n", 1, "exactly a P word"),
    ("G04 P5 X1\n", 1, "exactly a P word"),
    ("G02 X1\n", 1, "unknown G word"),
    ("G1.5 X1\n", 1, "unknown G word"),
    ("X1 Y2\n", 1, "no G word"),
    ("hello world\n", 1, "unrecognized"),
    ("G01 X1.2.3\n", 1, "unrecognized"),
    ("G01 (open X5\n", 1, "unbalanced"),
    ("G01 X5 )\n", 1, "unbalanced"),
    ("G01 X1\nG01 Y2\nG04 P1.5\nG01 Z3\n", 3, "integer"),
    ("G01 X1\n\n; fine\nG01 P1 Z2\n", 4, "mix"),
]
