"""Trace-identity engines for simultaneous orthogonal equivalence."""
from .report import (
    CONSISTENT,
    DISTINGUISHED,
    INCONCLUSIVE,
    IdentityReport,
    Violation,
    bound_label,
    futorny_ceiling,
    jing_ceiling,
    laffey_ceiling,
    minimal_r,
    pearcy_ceiling,
    quiver_ceiling,
    square_ceiling,
)
from .words import Alphabet, cyclic_canonical, enumerate_words, necklaces, trace_of_word
from .criteria import futorny_two_block_check, gram_letters, jing_check, specht_check
from .quiver import (
    Quiver,
    QuiverMatrixRep,
    futorny_quiver,
    loop_quiver,
    oriented_cycles,
    parallel_quiver,
    quiver_cycle_check,
)

__all__ = [
    'CONSISTENT',
    'DISTINGUISHED',
    'INCONCLUSIVE',
    'IdentityReport',
    'Violation',
    'Alphabet',
    'cyclic_canonical',
    'enumerate_words',
    'necklaces',
    'trace_of_word',
    'specht_check',
    'jing_check',
    'futorny_two_block_check',
    'gram_letters',
    'Quiver',
    'QuiverMatrixRep',
    'oriented_cycles',
    'loop_quiver',
    'parallel_quiver',
    'futorny_quiver',
    'quiver_cycle_check',
    'bound_label',
    'laffey_ceiling',
    'pearcy_ceiling',
    'square_ceiling',
    'minimal_r',
    'jing_ceiling',
    'futorny_ceiling',
    'quiver_ceiling',
]
