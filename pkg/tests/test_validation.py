import numpy as np
import pytest

from treedec.validation import (
    check_info_sequence,
    check_positive_int,
    check_prefix,
    check_probability,
    check_received_batch,
    check_received_sequence,
    check_symbol_sequence,
    check_word,
)
from treedec import CodeParams


def test_check_positive_int():
    assert check_positive_int(3, "x") == 3
    assert check_positive_int(np.int64(5), "x") == 5
    for bad in (0, -1):
        with pytest.raises(ValueError):
            check_positive_int(bad, "x")
    for bad in (1.0, True, "2"):
        with pytest.raises(TypeError):
            check_positive_int(bad, "x")


def test_check_probability():
    assert check_probability(0.0, "p") == 0.0
    assert check_probability(0.5, "p") == 0.5
    assert check_probability(0, "p") == 0.0
    with pytest.raises(ValueError):
        check_probability(0.6, "p")
    with pytest.raises(ValueError):
        check_probability(-0.1, "p")
    with pytest.raises(TypeError):
        check_probability(True, "p")
    assert check_probability(0.9, "p", maximum=1.0) == 0.9


def test_check_word():
    assert check_word(3, 2, "w") == 3
    assert check_word(np.uint8(255), 8, "w") == 255
    with pytest.raises(ValueError):
        check_word(4, 2, "w")
    with pytest.raises(ValueError):
        check_word(-1, 2, "w")
    with pytest.raises(TypeError):
        check_word(1.0, 2, "w")


def test_check_symbol_sequence():
    assert check_symbol_sequence([0, 1, 1], 3, 2, "s") == [0, 1, 1]
    assert check_symbol_sequence(np.array([2, 0]), 2, 4, "s") == [2, 0]
    with pytest.raises(ValueError):
        check_symbol_sequence([0, 1], 3, 2, "s")
    with pytest.raises(ValueError):
        check_symbol_sequence([0, 2], 2, 2, "s")
    with pytest.raises(TypeError):
        check_symbol_sequence("01", 2, 2, "s")


def test_sequence_helpers_use_code_params():
    params = CodeParams(2, 3, 4)
    assert check_info_sequence([3, 0, 1, 2], params) == [3, 0, 1, 2]
    assert check_received_sequence([7, 0, 5, 1], params) == [7, 0, 5, 1]
    with pytest.raises(ValueError):
        check_info_sequence([4, 0, 0, 0], params)
    with pytest.raises(ValueError):
        check_received_sequence([8, 0, 0, 0], params)


def test_check_prefix():
    params = CodeParams(1, 2, 5)
    assert check_prefix((1, 0, 1), params) == (1, 0, 1)
    assert check_prefix([], params) == ()
    with pytest.raises(ValueError):
        check_prefix((0,) * 6, params)
    with pytest.raises(ValueError):
        check_prefix((2,), params)


def test_check_received_batch():
    params = CodeParams(1, 2, 3)
    batch = check_received_batch([[0, 1, 3], [2, 2, 0]], params)
    assert batch.shape == (2, 3)
    assert batch.dtype.kind == "i"
    with pytest.raises(ValueError):
        check_received_batch([[0, 1], [2, 2]], params)
    with pytest.raises(ValueError):
        check_received_batch([[0, 1, 4]], params)
    with pytest.raises(ValueError):
        check_received_batch(np.zeros((2, 3, 1), dtype=int), params)
