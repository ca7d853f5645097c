"""Regular tree codes: parameters, label tables, generation, selection, file I/O.

A code is a complete 2**k-ary tree of depth d whose branches carry n-bit
labels.  Nodes are addressed two ways:

* by node path: the tuple of actions from the root, e.g. () or (0, 1, 1);
* by heap index: root 0, children of node j at j * B + 1 + a for action a,
  with B = 2**k.

Heap indexing keeps every tree level contiguous (level t starts at
(B**t - 1) / (B - 1)), which the exact decoders exploit for vectorized
level sweeps.  The label of (node j, action a) sits at flat position
j * B + a of the label table, so labels of a level are contiguous too.
"""

from __future__ import annotations

import io
from array import array
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .seeding import check_seed, derive_seed
from .validation import check_info_sequence, check_positive_int, check_probability

# Budget on label-table entries; generation refuses larger codes outright
# instead of thrashing memory.
DEFAULT_MAX_TABLE_ENTRIES = 1 << 28


class CodeTooLargeError(ValueError):
    """Requested code exceeds the explicit size budget."""


class CodeFileError(ValueError):
    """Code file is malformed or inconsistent with its header."""


@dataclass(frozen=True)
class CodeParams:
    """Tree-code parameters: k info bits per step, n-bit labels, depth d."""

    k: int
    n: int
    d: int

    def __post_init__(self):
        check_positive_int(self.k, "k")
        check_positive_int(self.n, "n")
        check_positive_int(self.d, "d")
        if self.n > 64:
            # labels travel as packed integers; one machine word per label
            raise ValueError(f"n must be at most 64 bits, got {self.n}")

    @property
    def num_actions(self) -> int:
        return 1 << self.k

    @property
    def num_leaves(self) -> int:
        return self.num_actions**self.d

    @property
    def num_nonleaf(self) -> int:
        b = self.num_actions
        return (b**self.d - 1) // (b - 1)

    @property
    def num_labels(self) -> int:
        return self.num_nonleaf * self.num_actions

    @property
    def rate(self) -> float:
        return self.k / self.n


# ---------------------------------------------------------------------------
# heap-index arithmetic


def child_index(node_index: int, action: int, num_actions: int) -> int:
    """Heap index of the child reached from node_index by action."""
    return node_index * num_actions + 1 + action


def prefix_to_index(prefix, num_actions: int) -> int:
    """Heap index of the node addressed by a path of actions from the root."""
    idx = 0
    for a in prefix:
        idx = idx * num_actions + 1 + a
    return idx


def index_to_prefix(index: int, num_actions: int) -> tuple[int, ...]:
    """Inverse of prefix_to_index."""
    if index < 0:
        raise ValueError(f"node index must be >= 0, got {index}")
    actions = []
    while index:
        index -= 1
        actions.append(index % num_actions)
        index //= num_actions
    return tuple(reversed(actions))


def level_offset(depth: int, num_actions: int) -> int:
    """Heap index of the first node at the given depth."""
    return (num_actions**depth - 1) // (num_actions - 1)


def label_position(node_index: int, action: int, num_actions: int) -> int:
    """Flat position of the label on branch (node_index, action)."""
    return node_index * num_actions + action


_DTYPE_BY_WIDTH = ((8, np.uint8, "B"), (16, np.uint16, "H"), (32, np.uint32, "I"), (64, np.uint64, "Q"))


def _storage_for(n: int):
    for bits, dtype, typecode in _DTYPE_BY_WIDTH:
        if n <= bits:
            return dtype, typecode
    raise CodeTooLargeError(f"labels wider than 64 bits are not supported, got n={n}")


class TreeCode:
    """An immutable branch-label table over the implicit heap-ordered tree.

    labels holds one n-bit word per (nonleaf node, action) pair in flat
    (node index, action) order: bytes when n <= 8, an array.array of a
    wider unsigned type otherwise.  seed records how the table was
    generated when known, purely as provenance.
    """

    __slots__ = ("params", "labels", "seed", "_np_view")

    def __init__(self, params: CodeParams, labels, seed: int | None = None):
        dtype, typecode = _storage_for(params.n)
        if isinstance(labels, (bytes, bytearray)) and typecode == "B":
            labels = bytes(labels)
        elif isinstance(labels, array) and labels.typecode == typecode:
            labels = bytes(labels) if typecode == "B" else array(typecode, labels)
        else:
            labels = array(typecode, (int(w) for w in labels))
            if typecode == "B":
                labels = bytes(labels)
        if len(labels) != params.num_labels:
            raise ValueError(
                f"label table must have {params.num_labels} entries, got {len(labels)}"
            )
        view = np.frombuffer(labels, dtype=dtype)
        if view.size and int(view.max()) >= (1 << params.n):
            raise ValueError(f"labels must fit in {params.n} bits")
        view.flags.writeable = False
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "seed", None if seed is None else check_seed(seed))
        object.__setattr__(self, "_np_view", view)

    def __setattr__(self, name, value):
        raise AttributeError("TreeCode is immutable")

    @property
    def labels_np(self) -> np.ndarray:
        """Read-only numpy view of the flat label table."""
        return self._np_view

    def label(self, node_index: int, action: int) -> int:
        """Label on the branch (node_index, action)."""
        return self.labels[node_index * self.params.num_actions + action]

    def branch_label(self, prefix, action: int) -> int:
        """Label on the branch leaving the node addressed by prefix."""
        idx = prefix_to_index(prefix, self.params.num_actions)
        return self.labels[idx * self.params.num_actions + action]

    def __eq__(self, other):
        if not isinstance(other, TreeCode):
            return NotImplemented
        return (
            self.params == other.params
            and self.seed == other.seed
            and np.array_equal(self._np_view, other._np_view)
        )

    def __hash__(self):
        return hash((self.params, self.seed, self._np_view.tobytes()))

    def __reduce__(self):
        # __slots__ plus blocked __setattr__ defeat default pickling
        return (TreeCode, (self.params, self.labels, self.seed))

    def __repr__(self):
        p = self.params
        return f"TreeCode(k={p.k}, n={p.n}, d={p.d}, seed={self.seed})"


def generate_random_code(
    params: CodeParams,
    seed: int,
    *,
    max_table_entries: int = DEFAULT_MAX_TABLE_ENTRIES,
) -> TreeCode:
    """Draw each node's branch labels uniformly without replacement.

    The labels leaving one node are distinct, so any two information
    sequences diverge in their codewords at the first differing symbol
    and a noiseless received sequence identifies its path uniquely.
    Each single label is still uniform over the n-bit words.
    """
    seed = check_seed(seed)
    if params.num_labels > max_table_entries:
        raise CodeTooLargeError(
            f"label table needs {params.num_labels} entries, "
            f"over the budget of {max_table_entries}"
        )
    b = params.num_actions
    space = 1 << params.n
    if b > space:
        raise ValueError(
            f"cannot draw {b} distinct {params.n}-bit labels per node; n must be >= k"
        )
    dtype, typecode = _storage_for(params.n)
    rng = np.random.default_rng(seed)
    cols = np.empty((params.num_nonleaf, b), dtype=dtype)
    for j in range(b):
        # uniform over the space - j values not yet used at this node:
        # draw a rank, then shift it past each smaller used value
        r = rng.integers(0, space - j, size=params.num_nonleaf, dtype=dtype)
        if j:
            prev = np.sort(cols[:, :j], axis=1)
            for t in range(j):
                r += r >= prev[:, t]
        cols[:, j] = r
    words = cols.reshape(-1)
    if typecode == "B":
        return TreeCode(params, words.tobytes(), seed=seed)
    store = array(typecode)
    store.frombytes(words.tobytes())
    return TreeCode(params, store, seed=seed)


def encode(code: TreeCode, info) -> np.ndarray:
    """Walk the tree along the info symbols and emit the branch labels."""
    info = check_info_sequence(info, code.params)
    b = code.params.num_actions
    labels = code.labels
    idx = 0
    out = []
    for a in info:
        out.append(labels[idx * b + a])
        idx = idx * b + 1 + a
    return np.array(out, dtype=code.labels_np.dtype)


def select_best_code(
    params: CodeParams,
    pool_size: int,
    trials_per_code: int,
    crossover_p: float,
    seed: int,
    *,
    max_table_entries: int = DEFAULT_MAX_TABLE_ENTRIES,
) -> TreeCode:
    """Generate a pool of random codes and keep the empirically best one.

    Each pool member i is generated with derive_seed(seed, 0, i).  All
    members are measured on the same trial set (info from
    derive_seed(seed, 1), flip masks from derive_seed(seed, 2)) under
    exact decoding at the given crossover probability; the code with the
    lowest bit error count wins, ties going to the lowest pool index.
    The winner keeps its own generation seed, so it can be regenerated
    without the pool.
    """
    from .channel import bsc_flip_words
    from .mlsd import mlsd_decode

    pool_size = check_positive_int(pool_size, "pool_size")
    trials_per_code = check_positive_int(trials_per_code, "trials_per_code")
    crossover_p = check_probability(crossover_p, "crossover_p")
    seed = check_seed(seed)

    b = params.num_actions
    info_rng = np.random.default_rng(derive_seed(seed, 1))
    infos = info_rng.integers(0, b, size=(trials_per_code, params.d))
    noise_rng = np.random.default_rng(derive_seed(seed, 2))
    masks = bsc_flip_words(noise_rng, crossover_p, (trials_per_code, params.d), params.n)

    best_code = None
    best_errors = None
    for i in range(pool_size):
        code = generate_random_code(
            params, derive_seed(seed, 0, i), max_table_entries=max_table_entries
        )
        errors = 0
        for t in range(trials_per_code):
            received = encode(code, infos[t]) ^ masks[t]
            estimate = mlsd_decode(code, received)
            errors += int(np.count_nonzero(estimate != infos[t]))
        if best_errors is None or errors < best_errors:
            best_code, best_errors = code, errors
    return best_code


def has_duplicate_codewords(code: TreeCode, *, max_leaves: int = 1 << 22) -> bool:
    """Check whether two leaves share the same full codeword (diagnostic)."""
    p = code.params
    if p.num_leaves > max_leaves:
        raise CodeTooLargeError(
            f"{p.num_leaves} leaves exceed the scan budget of {max_leaves}"
        )
    if p.n * p.d > 63:
        raise CodeTooLargeError("codeword scan supports n * d <= 63 bits")
    b = p.num_actions
    packed = None  # cumulative codeword per node, packed into one integer
    labels = code.labels_np
    for depth in range(p.d):
        lo = level_offset(depth, b)
        span = labels[lo * b : (lo + b**depth) * b].astype(np.int64)
        if packed is None:
            packed = span
        else:
            packed = (np.repeat(packed, b) << p.n) | span
    return int(np.unique(packed).size) < p.num_leaves


# ---------------------------------------------------------------------------
# file format: header of key = value lines, then one label per line as an
# n-character binary string, in flat (node index, action) order


def save_code(code: TreeCode, destination) -> None:
    """Write a code to a path or text file object."""
    lines = [f"k = {code.params.k}", f"n = {code.params.n}", f"d = {code.params.d}"]
    if code.seed is not None:
        lines.append(f"seed = {code.seed}")
    header = "\n".join(lines) + "\n"
    # render all labels at once; a per-label format() loop holds millions of
    # small strings alive at depth-25 scale
    width = code.params.n
    arr = code.labels_np
    mat = np.empty((arr.size, width + 1), dtype=np.uint8)
    mat[:, width] = ord("\n")
    for j in range(width):
        bit = (arr >> arr.dtype.type(j)) & arr.dtype.type(1)
        mat[:, width - 1 - j] = ord("0") + bit.astype(np.uint8)
    body = mat.tobytes()
    if hasattr(destination, "write"):
        destination.write(header + body.decode("ascii"))
    else:
        with open(Path(destination), "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(body)


def _parse_label_block(raw: bytes, start: int, width: int):
    """Vectorized parse of a regular label block, None if it is not regular.

    Regular means what save_code writes: width-character binary lines,
    one per label, nothing else.  Comments, blank lines, ragged widths or
    stray characters send the caller to the line-by-line path.
    """
    stride = width + 1
    tail = (len(raw) - start) % stride
    if tail == width:  # final newline missing
        block = np.frombuffer(raw[start:] + b"\n", dtype=np.uint8)
    elif tail == 0:
        block = np.frombuffer(raw, dtype=np.uint8, offset=start)
    else:
        return None
    if block.size == 0:
        return None
    mat = block.reshape(-1, stride)
    if not (mat[:, width] == ord("\n")).all():
        return None
    digits = mat[:, :width]
    if not ((digits >= ord("0")) & (digits <= ord("1"))).all():
        return None
    dtype, _ = _storage_for(width)
    words = np.zeros(mat.shape[0], dtype=dtype)
    for j in range(width):
        words = (words << dtype(1)) | (digits[:, j] - ord("0")).astype(dtype)
    return words


def _parse_label_lines(raw: bytes, start: int, first_lineno: int, width: int) -> array:
    """Line-by-line label parse with exact line numbers in errors."""
    _, typecode = _storage_for(width)
    words = array(typecode)
    buf = io.BytesIO(raw)
    buf.seek(start)
    for lineno, raw_line in enumerate(buf, start=first_lineno):
        line = raw_line.strip().decode("utf-8", errors="replace")
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            raise CodeFileError(f"line {lineno}: header line after labels")
        if len(line) != width or set(line) - {"0", "1"}:
            raise CodeFileError(
                f"line {lineno}: expected a {width}-character binary label, got {line!r}"
            )
        words.append(int(line, 2))
    return words


def load_code(source) -> TreeCode:
    """Read a code written by save_code, validating header and labels."""
    if hasattr(source, "read"):
        data = source.read()
        raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    else:
        raw = Path(source).read_bytes()
    header: dict[str, int] = {}
    size = len(raw)
    pos = lineno = 0
    label_start = None
    label_lineno = 0
    while pos < size:
        nl = raw.find(b"\n", pos)
        end = size if nl < 0 else nl
        lineno += 1
        line = raw[pos:end].strip().decode("utf-8", errors="replace")
        if line and not line.startswith("#"):
            if "=" not in line:
                label_start = pos
                label_lineno = lineno
                break
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in ("k", "n", "d", "seed"):
                raise CodeFileError(f"line {lineno}: unknown header key {key!r}")
            if key in header:
                raise CodeFileError(f"line {lineno}: duplicate header key {key!r}")
            try:
                header[key] = int(value.strip())
            except ValueError as exc:
                raise CodeFileError(f"line {lineno}: bad integer for {key!r}") from exc
        pos = end + 1
    if label_start is None:
        raise CodeFileError("no labels found")
    missing = {"k", "n", "d"} - set(header)
    if missing:
        raise CodeFileError(
            f"line {label_lineno}: labels start before header keys {sorted(missing)}"
        )
    try:
        params = CodeParams(header["k"], header["n"], header["d"])
    except (TypeError, ValueError) as exc:
        raise CodeFileError(f"bad header parameters: {exc}") from exc
    words = _parse_label_block(raw, label_start, params.n)
    if words is None:
        words = _parse_label_lines(raw, label_start, label_lineno, params.n)
    if len(words) != params.num_labels:
        raise CodeFileError(
            f"expected {params.num_labels} labels for (k={params.k}, d={params.d}), got {len(words)}"
        )
    dtype, typecode = _storage_for(params.n)
    if isinstance(words, np.ndarray):
        if typecode == "B":
            labels = words.tobytes()
        else:
            labels = array(typecode)
            labels.frombytes(words.tobytes())
    else:
        labels = bytes(words) if typecode == "B" else words
    return TreeCode(params, labels, seed=header.get("seed"))
