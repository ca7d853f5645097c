"""Binary symmetric channel simulation and the per-branch reward."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import check_seed
from .validation import check_positive_int, check_probability, check_word


@dataclass(frozen=True)
class ChannelConfig:
    """Memoryless binary symmetric channel: flip probability and noise seed."""

    crossover_p: float
    seed: int = 0

    def __post_init__(self):
        check_probability(self.crossover_p, "crossover_p")
        check_seed(self.seed)


def hamming_distance(a: int, b: int) -> int:
    """Number of differing bits between two words."""
    return (int(a) ^ int(b)).bit_count()


def reward(label: int, received_word: int, bits_per_symbol: int) -> int:
    """Branch reward: bits_per_symbol minus the Hamming distance to the
    received word.  Integer in [0, bits_per_symbol], maximal on agreement."""
    bits_per_symbol = check_positive_int(bits_per_symbol, "bits_per_symbol")
    label = check_word(label, bits_per_symbol, "label")
    received_word = check_word(received_word, bits_per_symbol, "received_word")
    return bits_per_symbol - hamming_distance(label, received_word)


def bsc_flip_words(
    rng: np.random.Generator, crossover_p: float, shape, bits_per_symbol: int
) -> np.ndarray:
    """Draw packed flip masks: each of bits_per_symbol bits set independently
    with probability crossover_p.  Bit b of a word is drawn b-th (LSB first),
    which fixes the draw order for replay."""
    crossover_p = check_probability(crossover_p, "crossover_p")
    shape = tuple(int(s) for s in (shape if np.iterable(shape) else (shape,)))
    flips = rng.random(shape + (bits_per_symbol,)) < crossover_p
    weights = (np.uint64(1) << np.arange(bits_per_symbol, dtype=np.uint64))
    return (flips * weights).sum(axis=-1, dtype=np.uint64)


def transmit_bsc(codeword, config: ChannelConfig, bits_per_symbol: int) -> np.ndarray:
    """Pass a codeword through the channel, flipping each of the
    bits_per_symbol bits of every word independently.

    The width is explicit because packed words do not carry it; flipping
    storage bits above the symbol width would fabricate invalid words.
    """
    words = np.asarray(codeword)
    if words.ndim != 1 or words.size == 0:
        raise ValueError("codeword must be a nonempty 1-D sequence of words")
    if not np.issubdtype(words.dtype, np.integer):
        raise TypeError(f"codeword must contain integers, got dtype {words.dtype}")
    if int(words.min()) < 0 or int(words.max()) >= (1 << bits_per_symbol):
        raise ValueError(f"codeword entries must fit in {bits_per_symbol} bits")
    rng = np.random.default_rng(check_seed(config.seed))
    mask = bsc_flip_words(rng, config.crossover_p, words.shape, bits_per_symbol)
    return (words.astype(np.uint64) ^ mask).astype(words.dtype)
