"""Input validation helpers used across the library and the estimator layer."""

from __future__ import annotations

import numbers

import numpy as np


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def check_probability(value, name: str, *, maximum: float = 0.5) -> float:
    """Validate a probability, by default capped at 0.5 (symmetric channel)."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not 0.0 <= value <= maximum:
        raise ValueError(f"{name} must be in [0, {maximum}], got {value}")
    return value


def check_word(word, bits_per_symbol: int, name: str = "word") -> int:
    """Validate one channel symbol as an unsigned bits_per_symbol-bit integer."""
    if isinstance(word, bool) or not isinstance(word, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(word).__name__}")
    word = int(word)
    if not 0 <= word < (1 << bits_per_symbol):
        raise ValueError(
            f"{name} must fit in {bits_per_symbol} bits, got {word}"
        )
    return word


def check_symbol_sequence(seq, length: int, alphabet_size: int, name: str) -> list[int]:
    """Validate a fixed-length sequence of integers in [0, alphabet_size)."""
    if isinstance(seq, (str, bytes)):
        raise TypeError(f"{name} must be a sequence of integers, not {type(seq).__name__}")
    try:
        items = [int(x) for x in seq]
    except (TypeError, ValueError) as exc:
        raise TypeError(f"{name} must be a sequence of integers") from exc
    if len(items) != length:
        raise ValueError(f"{name} must have length {length}, got {len(items)}")
    for i, x in enumerate(items):
        if not 0 <= x < alphabet_size:
            raise ValueError(
                f"{name}[{i}] must be in [0, {alphabet_size}), got {x}"
            )
    return items


def check_info_sequence(info, params) -> list[int]:
    """Validate an information sequence: d symbols, each in [0, 2**k)."""
    return check_symbol_sequence(info, params.d, params.num_actions, "info")


def check_received_sequence(received, params) -> list[int]:
    """Validate a received sequence: d words, each an n-bit integer."""
    return check_symbol_sequence(received, params.d, 1 << params.n, "received")


def check_prefix(prefix, params) -> tuple[int, ...]:
    """Validate a node path: at most d actions, each in [0, 2**k)."""
    if isinstance(prefix, (str, bytes)):
        raise TypeError("prefix must be a sequence of integers")
    try:
        items = tuple(int(a) for a in prefix)
    except (TypeError, ValueError) as exc:
        raise TypeError("prefix must be a sequence of integers") from exc
    if len(items) > params.d:
        raise ValueError(f"prefix longer than code depth {params.d}: {len(items)}")
    for i, a in enumerate(items):
        if not 0 <= a < params.num_actions:
            raise ValueError(
                f"prefix[{i}] must be in [0, {params.num_actions}), got {a}"
            )
    return items


def check_received_batch(batch, params) -> np.ndarray:
    """Validate a 2-D batch of received sequences, one row per decode."""
    arr = np.asarray(batch)
    if arr.ndim != 2:
        raise ValueError(f"batch must be 2-D (rows of received words), got ndim={arr.ndim}")
    if arr.shape[1] != params.d:
        raise ValueError(f"batch rows must have length {params.d}, got {arr.shape[1]}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise TypeError(f"batch must contain integers, got dtype {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() >= (1 << params.n)):
        raise ValueError(f"batch entries must fit in {params.n} bits")
    return arr
