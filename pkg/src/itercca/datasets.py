"""Data loading and generation.

Three sources of paired sparse matrices: standard file formats
(Matrix Market coordinate, libsvm lines), indicator matrices built from a
token stream (rows of x mark the current token, rows of y the one after),
and a synthetic generator that plants known canonical correlations behind
a controlled singular spectrum so tests know the right answer.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import as_sparse, thin_qr

_MM_HEADER = ("%%matrixmarket", "matrix", "coordinate", "real", "general")


def read_matrix_market(path):
    """Load a Matrix Market coordinate-format file as a sparse matrix.

    Only the real general coordinate flavor is accepted.  Duplicate
    entries are summed, per the format's convention.  Malformed content
    raises a ValueError naming the offending line.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    def fail(lineno, msg):
        raise ValueError(f"{path}:{lineno}: {msg}")

    if not lines:
        fail(1, "empty file")
    if tuple(lines[0].lower().split()) != _MM_HEADER:
        fail(1, f"expected header '%%MatrixMarket matrix coordinate real general', got {lines[0]!r}")

    body = [
        (i + 1, line)
        for i, line in enumerate(lines[1:], start=1)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        fail(len(lines), "missing size line")

    lineno, size_line = body[0]
    parts = size_line.split()
    if len(parts) != 3:
        fail(lineno, f"size line needs 'rows cols nnz', got {size_line!r}")
    try:
        n, p, nnz = (int(s) for s in parts)
    except ValueError:
        fail(lineno, f"non-integer size entry in {size_line!r}")
    if n < 0 or p < 0 or nnz < 0:
        fail(lineno, "negative size entry")
    if len(body) - 1 != nnz:
        fail(lineno, f"declared {nnz} entries, found {len(body) - 1}")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    for k, (lineno, line) in enumerate(body[1:]):
        parts = line.split()
        if len(parts) != 3:
            fail(lineno, f"entry needs 'row col value', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError:
            fail(lineno, f"non-numeric entry in {line!r}")
        if not (1 <= i <= n and 1 <= j <= p):
            fail(lineno, f"index ({i}, {j}) outside 1-based bounds ({n}, {p})")
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
    return as_sparse((vals, (rows, cols)), shape=(n, p))


def write_matrix_market(path, a):
    """Write a sparse matrix in Matrix Market coordinate format."""
    a = as_sparse(a)
    coo = a.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{a.shape[0]} {a.shape[1]} {a.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            # float repr round-trips the exact binary value
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def read_libsvm(path, n_cols):
    """Load a libsvm-format file (label idx:val ..., 1-based indices).

    Labels are discarded; each line becomes one row; an empty line is an
    all-zero row.  Indices outside [1, n_cols] and non-numeric fields
    raise a ValueError naming the line.
    """
    if n_cols < 1:
        raise ValueError("n_cols must be >= 1")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    rows, cols, vals = [], [], []
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        # first field is the label, possibly the line's only field
        for item in parts[1:]:
            idx_s, sep, val_s = item.partition(":")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'idx:val', got {item!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field {item!r}") from None
            if not 1 <= idx <= n_cols:
                raise ValueError(
                    f"{path}:{lineno}: index {idx} outside 1-based bound {n_cols}"
                )
            rows.append(lineno - 1)
            cols.append(idx - 1)
            vals.append(val)
    return as_sparse(
        (np.array(vals), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(len(lines), n_cols),
    )


@dataclass(frozen=True)
class TokenDatasetSpec:
    """Recipe for paired indicator matrices from a token stream.

    Per side, tokens are ranked by how often they occur in that side's
    role (x: current position, y: next position), ties broken by first
    appearance; the top drop_top are removed and the remainder truncated
    to vocab_limit (0 = unlimited).  Bigrams never span an occurrence of
    boundary_token.
    """

    tokens: Sequence[str]
    x_vocab_limit: int = 0
    y_vocab_limit: int = 0
    x_drop_top: int = 0
    y_drop_top: int = 0
    boundary_token: Optional[str] = None

    def __post_init__(self):
        if min(self.x_vocab_limit, self.y_vocab_limit) < 0:
            raise ValueError("vocab limits must be >= 0")
        if min(self.x_drop_top, self.y_drop_top) < 0:
            raise ValueError("drop counts must be >= 0")


def _role_vocab(tokens, role_tokens, drop_top, limit):
    """Column list for one side: frequency-ranked, dropped, truncated."""
    counts = {}
    for t in role_tokens:
        counts[t] = counts.get(t, 0) + 1
    first_seen = {}
    for i, t in enumerate(tokens):
        first_seen.setdefault(t, i)
    ranked = sorted(first_seen, key=lambda t: (-counts.get(t, 0), first_seen[t]))
    kept = ranked[drop_top:]
    if limit:
        kept = kept[:limit]
    return kept


def tokens_to_indicators(spec):
    """Paired one-hot matrices over a token stream's bigrams.

    Row i of x marks the current token of the i-th retained bigram, row i
    of y the token after it.  A bigram is retained only when both tokens
    survive their side's vocabulary trimming.
    """
    tokens = [t for t in spec.tokens]
    if not tokens:
        raise ValueError("token stream is empty")
    if spec.boundary_token is not None:
        pairs = [
            (a, b)
            for a, b in zip(tokens, tokens[1:])
            if spec.boundary_token not in (a, b)
        ]
        tokens = [t for t in tokens if t != spec.boundary_token]
        if not tokens:
            raise ValueError("token stream is empty after boundary removal")
    else:
        pairs = list(zip(tokens, tokens[1:]))

    x_vocab = _role_vocab(tokens, (a for a, _ in pairs), spec.x_drop_top, spec.x_vocab_limit)
    y_vocab = _role_vocab(tokens, (b for _, b in pairs), spec.y_drop_top, spec.y_vocab_limit)
    if not x_vocab or not y_vocab:
        raise ValueError("empty vocabulary after drops and limits")
    x_col = {t: j for j, t in enumerate(x_vocab)}
    y_col = {t: j for j, t in enumerate(y_vocab)}

    kept = [(a, b) for a, b in pairs if a in x_col and b in y_col]
    if not kept:
        raise ValueError("no bigrams survive the vocabulary trimming")
    n = len(kept)
    rows = np.arange(n, dtype=np.int64)
    ones = np.ones(n)
    x = as_sparse(
        (ones, (rows, np.array([x_col[a] for a, _ in kept], dtype=np.int64))),
        shape=(n, len(x_vocab)),
    )
    y = as_sparse(
        (ones, (rows, np.array([y_col[b] for _, b in kept], dtype=np.int64))),
        shape=(n, len(y_vocab)),
    )
    return x, y


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a paired synthetic instance with known correlations.

    k_shared latent factors are copied into both sides with per-factor
    correlation planted_corrs[i]; every other column is independent
    noise.  Column j of each side is scaled by (j+1)**(-spectrum_decay),
    so placement decides whether the correlated directions sit at the
    top, the bottom, both edges, or spread across the singular spectrum.  density < 1
    masks entries Bernoulli-style (shared pairs share their mask, which
    preserves the planted correlation); rotate mixes each side's columns
    by a random orthogonal matrix, which leaves canonical correlations
    unchanged but requires density = 1.
    """

    n: int
    p1: int
    p2: int
    k_shared: int
    planted_corrs: tuple = ()
    spectrum_decay: float = 0.0
    density: float = 1.0
    seed: int = 0
    placement: str = "top"
    rotate: bool = False

    def __post_init__(self):
        if min(self.n, self.p1, self.p2) < 1:
            raise ValueError("n, p1, p2 must be >= 1")
        if not 0 <= self.k_shared <= min(self.p1, self.p2):
            raise ValueError(f"k_shared={self.k_shared} outside [0, {min(self.p1, self.p2)}]")
        corrs = tuple(float(c) for c in self.planted_corrs)
        object.__setattr__(self, "planted_corrs", corrs)
        if len(corrs) != self.k_shared:
            raise ValueError("planted_corrs length must equal k_shared")
        if any(not 0.0 < c < 1.0 for c in corrs):
            raise ValueError("planted correlations must lie in (0, 1)")
        if any(a < b for a, b in zip(corrs, corrs[1:])):
            raise ValueError("planted_corrs must be sorted non-increasing")
        if self.spectrum_decay < 0:
            raise ValueError("spectrum_decay must be >= 0")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must be in (0, 1]")
        if self.placement not in ("top", "bottom", "spread", "edges"):
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.rotate and self.density < 1.0:
            raise ValueError("rotate requires density = 1 (rotation destroys sparsity)")


def _shared_positions(p, k, placement):
    if placement == "top":
        return np.arange(k)
    if placement == "bottom":
        return np.arange(p - k, p)
    if placement == "edges":
        # half at the strongest columns, the rest at the weakest
        head = k // 2
        return np.concatenate([np.arange(head), np.arange(p - (k - head), p)])
    return np.unique(np.linspace(0, p - 1, num=k, dtype=np.int64)) if k else np.arange(0)


def synth_correlated(spec):
    """Generate (x, y, planted_corrs) for a SynthSpec.

    The population canonical correlations of the model equal
    planted_corrs exactly; the sample correlations recovered from the
    generated matrices approach them as n grows past p1 + p2.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, p1, p2, k = spec.n, spec.p1, spec.p2, spec.k_shared

    z = rng.standard_normal((n, k))
    ex = rng.standard_normal((n, k))
    ey = rng.standard_normal((n, k))
    gx = rng.standard_normal((n, p1 - k))
    gy = rng.standard_normal((n, p2 - k))

    corrs = np.array(spec.planted_corrs)
    shared_x = z * np.sqrt(corrs) + ex * np.sqrt(1.0 - corrs)
    shared_y = z * np.sqrt(corrs) + ey * np.sqrt(1.0 - corrs)

    pos_x = _shared_positions(p1, k, spec.placement)
    pos_y = _shared_positions(p2, k, spec.placement)
    x = np.empty((n, p1))
    y = np.empty((n, p2))
    x[:, pos_x] = shared_x
    x[:, np.setdiff1d(np.arange(p1), pos_x)] = gx
    y[:, pos_y] = shared_y
    y[:, np.setdiff1d(np.arange(p2), pos_y)] = gy

    if spec.density < 1.0:
        # one mask per shared pair, applied to both sides, so masking
        # does not dilute the planted correlation
        mask_shared = rng.random((n, k)) < spec.density
        mask_x = rng.random((n, p1)) < spec.density
        mask_y = rng.random((n, p2)) < spec.density
        mask_x[:, pos_x] = mask_shared
        mask_y[:, pos_y] = mask_shared
        x = x * mask_x
        y = y * mask_y

    scale_x = np.power(np.arange(1, p1 + 1, dtype=np.float64), -spec.spectrum_decay)
    scale_y = np.power(np.arange(1, p2 + 1, dtype=np.float64), -spec.spectrum_decay)
    x = x * scale_x
    y = y * scale_y

    if spec.rotate:
        x = x @ thin_qr(rng.standard_normal((p1, p1))).q
        y = y @ thin_qr(rng.standard_normal((p2, p2))).q

    return as_sparse(x), as_sparse(y), corrs
