"""Sample containers, seeded randomness, and dataset splitting.

A :class:`SampleSet` is an immutable (n, d) table of input points with an
optional length-n response vector. Maps between point clouds are plain
callables acting on row-stacked arrays: a d_in -> d_out map takes an
(n, d_in) array to (n, d_out), a scalar-valued model takes (n, d) to (n,).
Maps are deterministic: repeated evaluation at equal inputs returns
identical outputs.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .validation import as_point_matrix, as_value_vector

__all__ = ["SampleSet", "split", "child_seed", "rng_from"]


def child_seed(seed, *labels):
    """Derive a child seed stream by fixed integer labeling.

    Equal (seed, labels) always yield the same stream, so trials labelled
    by e.g. (m, trial_index) are reproducible independently of the order
    in which they run.
    """
    if isinstance(seed, np.random.SeedSequence):
        base_entropy, base_key = seed.entropy, tuple(seed.spawn_key)
    else:
        base_entropy, base_key = int(seed), ()
    return np.random.SeedSequence(base_entropy, spawn_key=base_key + tuple(int(x) for x in labels))


def rng_from(seed, *labels):
    """Generator seeded by ``child_seed(seed, *labels)``."""
    return np.random.default_rng(child_seed(seed, *labels))


@dataclass(frozen=True)
class SampleSet:
    """Immutable set of n points of common dimension d, with optional responses.

    Parameters
    ----------
    X : array-like of shape (n, d)
        Input points; every coordinate must be finite.
    y : array-like of shape (n,), optional
        Scalar responses aligned with the rows of ``X``.
    """

    X: np.ndarray
    y: np.ndarray | None = field(default=None)

    def __post_init__(self):
        X = as_point_matrix(self.X, name="X")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = as_value_vector(self.y, name="y")
            if y.shape[0] != X.shape[0]:
                raise ValueError(
                    f"responses have length {y.shape[0]}, expected {X.shape[0]}"
                )
            y.setflags(write=False)
            object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    @property
    def dimension(self):
        """Common dimension d of all points."""
        return self.X.shape[1]

    @property
    def has_responses(self):
        return self.y is not None

    def to_csv(self, path_or_buffer):
        """Write as CSV with header ``x1,...,xd[,y]`` at full precision."""
        d = self.dimension
        header = [f"x{i + 1}" for i in range(d)] + (["y"] if self.has_responses else [])
        close = False
        if isinstance(path_or_buffer, (str, bytes)) or hasattr(path_or_buffer, "__fspath__"):
            buf = open(path_or_buffer, "w", newline="")
            close = True
        else:
            buf = path_or_buffer
        try:
            writer = csv.writer(buf)
            writer.writerow(header)
            for i in range(len(self)):
                row = [f"{v:.17g}" for v in self.X[i]]
                if self.has_responses:
                    row.append(f"{self.y[i]:.17g}")
                writer.writerow(row)
        finally:
            if close:
                buf.close()

    @classmethod
    def from_csv(cls, path_or_buffer):
        """Read a SampleSet written by :meth:`to_csv`."""
        close = False
        if isinstance(path_or_buffer, (str, bytes)) or hasattr(path_or_buffer, "__fspath__"):
            buf = open(path_or_buffer, "r", newline="")
            close = True
        else:
            buf = path_or_buffer
        try:
            reader = csv.reader(buf)
            header = next(reader)
            has_y = header[-1] == "y"
            d = len(header) - (1 if has_y else 0)
            if header[:d] != [f"x{i + 1}" for i in range(d)]:
                raise ValueError(f"unrecognized CSV header {header!r}")
            rows = [list(map(float, row)) for row in reader if row]
        finally:
            if close:
                buf.close()
        data = np.asarray(rows, dtype=np.float64)
        if data.size == 0:
            raise ValueError("CSV contains no sample rows")
        if has_y:
            return cls(data[:, :d], data[:, d])
        return cls(data)

    def to_csv_string(self):
        buf = io.StringIO(newline="")
        self.to_csv(buf)
        return buf.getvalue()


def split(data, fraction, seed):
    """Partition ``data`` into two disjoint SampleSets of sizes
    ``floor(fraction * n)`` and the remainder.

    The permutation is determined by ``seed``; equal arguments always
    produce the identical partition.
    """
    n = len(data)
    if n < 2:
        raise ValueError("split needs at least 2 samples")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    k = int(np.floor(fraction * n))
    if k < 1 or n - k < 1:
        raise ValueError(
            f"degenerate split: fraction={fraction} on n={n} leaves an empty part"
        )
    perm = rng_from(seed).permutation(n)
    first, second = np.sort(perm[:k]), np.sort(perm[k:])

    def take(idx):
        return SampleSet(data.X[idx], data.y[idx] if data.has_responses else None)

    return take(first), take(second)
