"""Shared fixtures and independent oracles for the test suite."""

from fractions import Fraction

import numpy as np
import pytest

from doflab.network import FULL_IC, Network, generate_generic


def oracle_rank(a) -> int:
    """Textbook dense Gaussian elimination over Fractions.

    Deliberately separate from the package's sparse elimination so the two
    can check each other.
    """
    rows = [[Fraction(x) for x in r] for r in np.asarray(a, dtype=object).tolist()]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


# channel matrices of the worked (M_T, M_R) = (2, 5) four-user example
EXAMPLE_2X5 = {
    (2, 1): [[0.5888, -0.3927], [1.0095, -1.5730], [-0.4297, -1.3400], [0.3536, 0.4674], [-1.4046, 0.6240]],
    (2, 3): [[-2.4617, 0.1171], [1.9378, 1.5657], [0.8237, 0.5253], [-0.8099, 1.5186], [0.4344, -0.6581]],
    (2, 4): [[-0.5819, -1.4890], [0.2349, 0.1483], [-0.0988, 0.9539], [-0.1352, 2.2932], [-1.8865, -0.1452]],
    (3, 1): [[0.0720, -1.9399], [0.7140, 2.4346], [1.2446, 0.3470], [0.4961, -0.9756], [0.5580, 0.4654]],
    (3, 2): [[-0.0999, -0.9784], [-0.2805, -1.1571], [0.4136, -0.0548], [0.2967, 1.1387], [1.1556, 0.7722]],
    (3, 4): [[0.6760, 0.0171], [-0.8062, -0.3684], [0.0049, -0.3526], [0.8783, 0.3086], [-0.9020, 0.3290]],
}
EXAMPLE_DIRECTIONS = {2: [0.3227, 1.2639], 3: [0.7366, 1.0464]}


def example_network(fill_seed: int = 0) -> Network:
    """The (2, 5) example; links it does not list come from a generic draw."""
    base = generate_generic(FULL_IC, 4, 2, 5, fill_seed)
    ch = {k: np.array(v, dtype=float) for k, v in base.channels.items()}
    ch.update({k: np.array(v, dtype=float) for k, v in EXAMPLE_2X5.items()})
    return Network(FULL_IC, 4, 2, 5, ch, seed=fill_seed, label="example_2x5")


@pytest.fixture
def example_net():
    return example_network()


# one "criterion N: PASS/FAIL ..." line per acceptance criterion, filled in by
# test_acceptance.py and echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
