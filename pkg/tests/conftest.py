"""Shared fixtures: a small three-block system used across suites.

Kept independent of the catalog module on purpose, so the model and
dynamics suites exercise hand-assembled systems and the catalog suite
can cross-check its own constructions against these.
"""

from blocksep.model import (
    BlockStructure, NaturalBlock, PhasePoint, ProbePlan, StackelMatrix,
    build_system,
)


def make_pendula_like():
    """Two pendulum blocks and a free block, polynomially coupled."""
    structure = BlockStructure((1, 1, 1), (("q1",), ("q2",), ("q3",)))
    stackel = StackelMatrix((
        ("2", "1+q1", "2*q1^2+2"),
        ("3", "q2", "q2^3+2"),
        ("4", "q3", "q3^2+1"),
    ))
    blocks = (
        NaturalBlock((("1",),), "-cos(q1)/2"),
        NaturalBlock((("1",),), "-cos(q2)/2"),
        NaturalBlock((("1",),), "0"),
    )
    probes = ProbePlan(points=({"q1": 0.0, "q2": 0.0, "q3": 0.0},),
                       box={"q1": (-0.3, 0.3), "q2": (-0.3, 0.3),
                            "q3": (-0.3, 0.3)})
    return build_system(structure, stackel, blocks, probes)


# rest point of the two pendula with a slight offset, used throughout
PENDULA_P0 = PhasePoint((0.2, -0.2, 0.0), (0.0, 0.0, 0.0))

# frozen reference values of H, K_2, K_3 on the orbit through P0
PENDULA_C = (0.09494666248, 0.0916913483, -0.3797866499)
