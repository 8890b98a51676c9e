"""
Words over matrix alphabets: cyclic canonical forms, necklace enumeration,
batched trace evaluation and the comparison loop shared by every criterion.
"""
import concurrent.futures
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from errors import LUEquivError, ShapeMismatch
from .report import Violation

Word = Tuple[int, ...]


class Alphabet:
    """A nonempty list of real n x n letters with display labels."""

    def __init__(self, letters: Sequence[np.ndarray], labels: Optional[Sequence[str]] = None):
        if len(letters) == 0:
            raise ShapeMismatch("an alphabet needs at least one letter")
        mats = [np.asarray(m, dtype=float) for m in letters]
        shape = mats[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ShapeMismatch(f"letters must be square, got {shape}")
        for m in mats:
            if m.shape != shape:
                raise ShapeMismatch(f"letters have mixed shapes {shape} and {m.shape}")
        self.letters = np.stack(mats)
        self.letters.setflags(write=False)
        self.labels = list(labels) if labels is not None else [f"x{i}" for i in range(len(mats))]
        if len(self.labels) != len(mats):
            raise ShapeMismatch("one label per letter is required")

    @property
    def size(self) -> int:
        return self.letters.shape[0]

    @property
    def n(self) -> int:
        return self.letters.shape[1]

    def __len__(self):
        return self.size


def cyclic_canonical(word: Sequence[int]) -> Word:
    """Lexicographically least rotation."""
    word = tuple(word)
    if not word:
        raise LUEquivError("words have length >= 1")
    return min(word[i:] + word[:i] for i in range(len(word)))


def necklaces(k: int, n: int) -> Iterator[Word]:
    """Canonical words of length exactly n over k letters, in lexicographic order."""
    a = [0] * (n + 1)
    yield tuple(a[1:])
    while True:
        i = n
        while i > 0 and a[i] == k - 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n + 1):
            a[j] = a[j - i]
        if n % i == 0:
            yield tuple(a[1:])


def enumerate_words(alphabet_size: int, max_len: int) -> Iterator[Word]:
    """Each cyclic class of length <= max_len exactly once, ascending length then lexicographic."""
    if alphabet_size < 1 or max_len < 1:
        raise LUEquivError("alphabet_size and max_len must be >= 1")
    for length in range(1, max_len + 1):
        yield from necklaces(alphabet_size, length)


def trace_of_word(alphabet: Alphabet, word: Sequence[int]) -> float:
    """Trace of the ordered letter product, left to right."""
    word = tuple(word)
    if not word:
        raise LUEquivError("words have length >= 1")
    if min(word) < 0 or max(word) >= alphabet.size:
        raise LUEquivError(f"word {word} uses letters outside an alphabet of size {alphabet.size}")
    P = alphabet.letters[word[0]]
    for i in word[1:]:
        P = P @ alphabet.letters[i]
    return float(np.trace(P))


def word_traces(letters: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Traces for a (B, L) block of equal-length words."""
    P = letters[words[:, 0]]
    for t in range(1, words.shape[1]):
        P = P @ letters[words[:, t]]
    return np.trace(P, axis1=1, axis2=2)


@dataclass
class Comparison:
    words_checked: int = 0
    max_residual: float = 0.0
    horizon: int = 0
    first_violation: Optional[Violation] = None
    violations: List[Violation] = field(default_factory=list)


def _blocks(words: Iterable[Word], chunk_size: int) -> Iterator[np.ndarray]:
    it = iter(words)
    while True:
        block = list(islice(it, chunk_size))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def compare_traces(
    words_of_length: Callable[[int], Iterable[Word]],
    max_len: int,
    lhs: Callable[[np.ndarray], np.ndarray],
    rhs: Callable[[np.ndarray], np.ndarray],
    tol: float,
    full_sweep: bool = False,
    threads: int = 1,
    chunk_size: int = 4096,
    debug: bool = False,
    label: str = "",
) -> Comparison:
    """
    Compare lhs/rhs word traces length by length. A word violates when
    |lhs - rhs| > tol * max(1, |lhs|).

    Blocks run on a thread pool when `threads` > 1 but are reduced in
    canonical order, so the first violation and the words_checked count do
    not depend on the thread count.
    """
    result = Comparison()

    def evaluate(block: np.ndarray):
        return block, lhs(block), rhs(block)

    executor = None
    if threads > 1:
        executor = concurrent.futures.ThreadPoolExecutor(max_workers=threads, thread_name_prefix="WordWorker")
    try:
        for length in range(1, max_len + 1):
            result.horizon = length
            blocks = _blocks(words_of_length(length), chunk_size)
            length_words = 0
            length_max = 0.0
            while True:
                # Keep two blocks per worker in flight
                window = list(islice(blocks, max(1, threads) * 2))
                if not window:
                    break
                # map yields in submission order, so blocks are reduced canonically
                outputs = executor.map(evaluate, window) if executor else map(evaluate, window)
                for block, left, right in outputs:
                    residual = np.abs(left - right)
                    bad = residual > tol * np.maximum(1.0, np.abs(left))
                    # Stop at the first violating word unless sweeping everything
                    if bad.any() and not full_sweep:
                        first = int(np.argmax(bad))
                        result.words_checked += first + 1
                        length_words += first + 1
                        result.max_residual = max(result.max_residual, float(residual[: first + 1].max()))
                        result.first_violation = Violation(
                            tuple(int(i) for i in block[first]), float(left[first]), float(right[first]), float(residual[first])
                        )
                        if debug:
                            print(f"[DEBUG] {label} violation at length {length} after {result.words_checked} words: "
                                  f"residual {residual[first]:.3g}")
                        return result
                    # Full sweep: record every violation and keep going
                    for idx in np.flatnonzero(bad):
                        violation = Violation(tuple(int(i) for i in block[idx]), float(left[idx]), float(right[idx]), float(residual[idx]))
                        if result.first_violation is None:
                            result.first_violation = violation
                        result.violations.append(violation)
                    result.words_checked += len(block)
                    length_words += len(block)
                    length_max = max(length_max, float(residual.max()))
                    result.max_residual = max(result.max_residual, length_max)
            if debug:
                print(f"[DEBUG] {label} length {length}: {length_words} words, max residual {length_max:.3g}")
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    return result
