"""Exhaustive k-separability censuses of Boolean functions for n <= 4.

Every function's profile under a direction depends only on the ordered
partition of the vertices by projection value, so direction sets are reduced
to distinct partitions first (``w`` and ``-w`` give mirrored partitions and
the same k).  A partition is then swept over all ``2**(2**n)`` truth tables
at once: the table bits are gathered into partition order with a 0/1 matrix
product, and runs are counted with shift-xor-popcount on the gathered mask.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import exactlp
from .boolfn import MAX_CENSUS_N, BooleanFunction, from_index
from .projection import Direction, profile

UNRESOLVED = 255
PERTURBATION_SCHEMES = ("linear", "binary")
DEFAULT_GRID_DENOMINATORS = (3, 4, 5, 6)

_POPCOUNT16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


def _check_census_n(n: int) -> None:
    if not isinstance(n, int) or not 1 <= n <= MAX_CENSUS_N:
        raise ValueError(
            f"censuses need 1 <= n <= {MAX_CENSUS_N}; n=5 already has 2**32 functions"
        )


def vertex_matrix(n: int) -> np.ndarray:
    """(2**n, n) 0/1 coordinates, x1 as the most significant bit of the row index."""
    v = np.arange(1 << n)
    return ((v[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int64)


@dataclass(frozen=True)
class DirectionSet:
    directions: tuple[Direction, ...]
    generator: str
    removed: int = 0

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    @property
    def n(self) -> int:
        return self.directions[0].n


def _collect(ws: DirectionSet | Iterable[Direction]) -> tuple[list[Direction], str]:
    if isinstance(ws, DirectionSet):
        return list(ws.directions), ws.generator
    return list(ws), "explicit"


def _first_sign_positive(w: Sequence[int]) -> bool:
    return next(x for x in w if x) > 0


def canonical_directions(n: int, signed: bool = False) -> DirectionSet:
    """All weight vectors over {0, +-1}; one per {w, -w} pair unless ``signed``.

    Ordered by support size, then support position, then sign pattern, which
    for n=3 is the row order (100), (010), ..., (111), (11-1), ... of the
    usual table layout.
    """
    _check_census_n(n)
    out = []
    for w in itertools.product((1, 0, -1), repeat=n):
        if not any(w) or (not signed and not _first_sign_positive(w)):
            continue
        support = tuple(i for i, x in enumerate(w) if x)
        out.append(((len(support), support, tuple(-x for x in w if x)), w))
    out.sort()
    name = "canonical-signed" if signed else "canonical"
    return DirectionSet(tuple(Direction(w, 1, "canonical") for _, w in out), name)


def perturbation_vector(n: int, scheme: str = "linear") -> tuple[int, ...]:
    """Per-weight shifts in hundredths: i (linear) or 2**(i-1) (binary), i 1-based."""
    if scheme == "linear":
        return tuple(range(1, n + 1))
    if scheme == "binary":
        return tuple(1 << i for i in range(n))
    raise ValueError(f"unknown perturbation scheme {scheme!r}; use one of {PERTURBATION_SCHEMES}")


def perturb(ws: DirectionSet | Iterable[Direction], scheme: str = "linear") -> DirectionSet:
    """Add ``shift_i / 100`` to weight i of every direction, zeros included.

    ``"binary"`` shifts are signed-sum distinct, so for canonical inputs at
    n <= 4 no two vertices share a projection.  ``"linear"`` shifts leave
    some ties, e.g. (1, 0, 1) + (.01, .02, .03) maps vertices 6 and 1 together.
    """
    dirs, gen = _collect(ws)
    out = []
    for w in dirs:
        shift = perturbation_vector(w.n, scheme)
        vals = [q + Fraction(s, 100) for q, s in zip(w.weights, shift)]
        out.append(Direction.of(vals, tag="perturbed"))
    suffix = "" if scheme == "linear" else f"-{scheme}"
    return DirectionSet(tuple(out), f"perturbed{suffix}-{gen}")


def perturbed_canonical(n: int, scheme: str = "linear") -> DirectionSet:
    """Perturbation of all signed canonical directions.

    Shifting ``w`` and ``-w`` by the same vector gives two different
    directions, so the signed set (``3**n - 1`` vectors) is perturbed.
    """
    ds = perturb(canonical_directions(n, signed=True), scheme)
    suffix = "" if scheme == "linear" else f"-{scheme}"
    return DirectionSet(ds.directions, f"perturbed{suffix}-canonical")


def grid_values(denominators: Sequence[int] = DEFAULT_GRID_DENOMINATORS) -> list[Fraction]:
    vals = {Fraction(j, d) for d in denominators for j in range(-d, d + 1)}
    return sorted(vals)


def _dense_ranks(num: np.ndarray, n: int) -> np.ndarray:
    """Per-row dense rank of each vertex's projection (ties share a rank)."""
    proj = num @ vertex_matrix(n).T
    order = np.argsort(proj, axis=1, kind="stable")
    sp = np.take_along_axis(proj, order, axis=1)
    step = np.concatenate(
        [np.zeros((len(proj), 1), dtype=np.int64), (np.diff(sp, axis=1) > 0).astype(np.int64)], axis=1
    )
    grp = np.cumsum(step, axis=1)
    ranks = np.empty_like(grp)
    np.put_along_axis(ranks, order, grp, axis=1)
    return ranks


def _sign_canonical(ranks: np.ndarray) -> np.ndarray:
    """Pick, per row, the lexicographically smaller of the rank vector and its mirror."""
    mirror = ranks.max(axis=1, keepdims=True) - ranks
    differs = ranks != mirror
    first = np.argmax(differs, axis=1)
    rows = np.arange(len(ranks))
    keep = ranks[rows, first] <= mirror[rows, first]
    return np.where(keep[:, None], ranks, mirror)


def partition_keys(ws: Sequence[Direction]) -> np.ndarray:
    """Sign-folded dense-rank vectors, one row per direction."""
    n = ws[0].n
    if any(w.n != n for w in ws):
        raise ValueError("directions of mixed dimension")
    num = np.array([w.numerators for w in ws], dtype=np.int64)
    return _sign_canonical(_dense_ranks(num, n))


def ordered_partition(w: Direction) -> tuple[tuple[int, ...], ...]:
    """Vertex sets in increasing projection order."""
    n = w.n
    vals = [w.project_vertex(v) for v in range(1 << n)]
    levels = sorted(set(vals))
    return tuple(tuple(v for v in range(1 << n) if vals[v] == x) for x in levels)


def _unique_partitions(dirs: Sequence[Direction]) -> tuple[np.ndarray, list[int]]:
    """Distinct partition keys and, for each, a representative index into ``dirs``.

    The representative is the smallest direction by weights, so the result
    does not depend on the order of ``dirs``.
    """
    by_weight = sorted(range(len(dirs)), key=lambda i: (dirs[i].weights, i))
    keys = partition_keys([dirs[i] for i in by_weight])
    uniq, first = np.unique(keys, axis=0, return_index=True)
    return uniq, [by_weight[i] for i in first]


def dedupe(ws: DirectionSet | Iterable[Direction]) -> DirectionSet:
    dirs, gen = _collect(ws)
    if not dirs:
        return DirectionSet((), gen)
    _, reps = _unique_partitions(dirs)
    kept = tuple(dirs[i] for i in sorted(reps))
    return DirectionSet(kept, gen, removed=len(dirs) - len(kept))


def grid_matrix(n: int, denominators: Sequence[int] = DEFAULT_GRID_DENOMINATORS):
    """All non-zero grid directions as integer rows over one common denominator."""
    vals = grid_values(denominators)
    den = math.lcm(*(v.denominator for v in vals))
    ints = np.array([int(v * den) for v in vals], dtype=np.int64)
    grid = np.array(np.meshgrid(*([ints] * n), indexing="ij")).reshape(n, -1).T
    return grid[np.any(grid != 0, axis=1)], den


def directions_matrix(ws: Sequence[Direction]) -> tuple[np.ndarray, int]:
    """Stack directions as integer rows over their least common denominator."""
    den = math.lcm(*(w.denominator for w in ws))
    rows = [[a * (den // w.denominator) for a in w.numerators] for w in ws]
    return np.array(rows, dtype=np.int64), den


def rank_directions(f: BooleanFunction, W: np.ndarray, chunk: int = 1 << 15) -> np.ndarray:
    """Row indices of ``W`` that reach the lowest valid k for ``f``, best margin first.

    Ordering is fewest runs, then widest raw gap (in units of the common
    denominator), then largest smallest run, then row index.  Rows whose
    projection merges opposite labels are skipped.  Vectorized, so the full
    undeduplicated n=4 grid takes a few seconds.
    """
    n = f.n
    V = vertex_matrix(n)
    lab = np.array([f.value(v) for v in range(f.n_vertices)])
    ks, gaps, small = [], [], []
    for lo in range(0, len(W), chunk):
        P = W[lo:lo + chunk] @ V.T
        order = np.argsort(P, axis=1, kind="stable")
        Ps = np.take_along_axis(P, order, axis=1)
        Ls = lab[order]
        same = Ps[:, 1:] == Ps[:, :-1]
        flip = Ls[:, 1:] != Ls[:, :-1]
        bad = np.any(same & flip, axis=1)
        change = flip & ~same
        k = 1 + change.sum(axis=1)
        step = np.where(change, Ps[:, 1:] - Ps[:, :-1], np.iinfo(np.int64).max)
        gap = step.min(axis=1)
        run = np.ones(len(P), dtype=np.int64)
        smallest = np.full(len(P), f.n_vertices, dtype=np.int64)
        for j in range(change.shape[1]):
            c = change[:, j]
            smallest = np.where(c, np.minimum(smallest, run), smallest)
            run = np.where(c, 1, run + 1)
        smallest = np.minimum(smallest, run)
        k[bad] = UNRESOLVED
        ks.append(k)
        gaps.append(gap)
        small.append(smallest)
    k, gap, smallest = np.concatenate(ks), np.concatenate(gaps), np.concatenate(small)
    kmin = k.min()
    if kmin == UNRESOLVED:
        return np.empty(0, dtype=np.int64)
    idx = np.flatnonzero(k == kmin)
    # lexsort: last key is primary
    return idx[np.lexsort((idx, -smallest[idx], -gap[idx]))]


def fractional_grid(n: int, denominators: Sequence[int] = DEFAULT_GRID_DENOMINATORS,
                    dedupe_partitions: bool = True) -> DirectionSet:
    """Weights from the union of multiples of ``1/d`` in [-1, 1], d in ``denominators``.

    The default union has 25 values over the common denominator 60.  With
    ``dedupe_partitions`` one direction is kept per distinct ordered vertex
    partition (sign mirrors folded together).
    """
    _check_census_n(n)
    grid, den = grid_matrix(n, denominators)
    if not dedupe_partitions:
        dirs = tuple(Direction.of([Fraction(int(a), den) for a in row], tag="grid") for row in grid)
        return DirectionSet(dirs, "fractional-grid")
    keys = _sign_canonical(_dense_ranks(grid, n))
    # grid rows are already in increasing weight order, so first occurrence is canonical
    _, first = np.unique(keys, axis=0, return_index=True)
    first = np.sort(first)
    dirs = tuple(Direction.of([Fraction(int(a), den) for a in grid[i]], tag="grid") for i in first)
    return DirectionSet(dirs, "fractional-grid", removed=len(grid) - len(dirs))


# -- census -----------------------------------------------------------------


@dataclass
class SeparabilityCensus:
    n: int
    mode: str
    generator: str
    histogram: dict[int, int]
    unresolved: int
    degenerate_only: int = 0
    n_directions: int = 0
    n_partitions: int = 0
    best_k: np.ndarray | None = field(default=None, repr=False)
    witness: np.ndarray | None = field(default=None, repr=False)
    directions: tuple[Direction, ...] = field(default=(), repr=False)

    @property
    def total(self) -> int:
        return sum(self.histogram.values()) + self.unresolved

    @property
    def max_k(self) -> int | None:
        nz = [k for k, c in self.histogram.items() if c]
        return max(nz) if nz else None

    def counts(self, ks: Iterable[int]) -> tuple[int, ...]:
        return tuple(self.histogram.get(k, 0) for k in ks)

    def k_of(self, index: int) -> int | None:
        k = int(self.best_k[index])
        return None if k == UNRESOLVED else k

    def records(self, exact_gap: bool = True):
        """Per-function rows (index, k, witness direction, its min gap)."""
        for idx in range(len(self.best_k)):
            k = self.k_of(idx)
            if k is None:
                yield {"index": idx, "k": None, "direction": None, "min_gap": None}
                continue
            w = self.directions[int(self.witness[idx])]
            gap = None
            if exact_gap:
                p = profile(from_index(self.n, idx), w)
                gap = None if p.min_gap is None else str(p.min_gap)
            yield {"index": idx, "k": k, "direction": [str(x) for x in w.weights], "min_gap": gap}

    def to_json(self, records: bool = False) -> dict:
        out = {
            "n": self.n,
            "mode": self.mode,
            "generator": self.generator,
            "histogram": {str(k): c for k, c in sorted(self.histogram.items())},
            "unresolved": self.unresolved,
            "degenerate_only": self.degenerate_only,
            "total": self.total,
            "max_k": self.max_k,
            "n_directions": self.n_directions,
            "n_partitions": self.n_partitions,
        }
        if records:
            out["records"] = list(self.records())
        return out


def _membership_matrices(ranks: np.ndarray, n_vertices: int):
    """Gather matrices for a batch of partitions.

    ``gather[:, j]`` maps the first vertex of group g to bit g of the reduced
    mask; ``spread[:, j]`` copies each group's first-vertex bit back onto all
    of its vertices, so a table is group-constant iff spreading reproduces it.
    """
    b = len(ranks)
    gather = np.zeros((n_vertices, b), dtype=np.float32)
    spread = np.zeros((n_vertices, b), dtype=np.float32)
    low = np.zeros(b, dtype=np.int32)
    tie_free = np.zeros(b, dtype=bool)
    for j, r in enumerate(ranks):
        m = int(r.max()) + 1
        low[j] = (1 << (m - 1)) - 1
        tie_free[j] = m == n_vertices
        rep = np.full(m, -1)
        for v in range(n_vertices):
            if rep[r[v]] < 0:
                rep[r[v]] = v
        gather[rep, j] = 2.0 ** np.arange(m)
        for v in range(n_vertices):
            spread[rep[r[v]], j] += 2.0 ** v
    return gather, spread, low, tie_free


def _sweep(n: int, ranks: np.ndarray, offset: int, batch: int):
    """Best k, witness partition and best tie-free k for every table, over ``ranks``."""
    nv = 1 << n
    tables = np.arange(1 << nv, dtype=np.int32)
    bits = ((tables[:, None] >> np.arange(nv)) & 1).astype(np.float32)
    best = np.full(len(tables), UNRESOLVED, dtype=np.uint8)
    best_tf = np.full(len(tables), UNRESOLVED, dtype=np.uint8)
    arg = np.full(len(tables), -1, dtype=np.int64)
    for s in range(0, len(ranks), batch):
        chunk = ranks[s:s + batch]
        gather, spread, low, tie_free = _membership_matrices(chunk, nv)
        reduced = (bits @ gather).astype(np.int32)
        k = 1 + _POPCOUNT16[(reduced ^ (reduced >> 1)) & low]
        if not tie_free.all():
            spread_tables = (bits @ spread).astype(np.int32)
            k = np.where(spread_tables == tables[:, None], k, UNRESOLVED).astype(np.uint8)
        kmin = k.min(axis=1)
        kpos = k.argmin(axis=1) + offset + s
        better = kmin < best
        best = np.where(better, kmin, best)
        arg = np.where(better, kpos, arg)
        if tie_free.any():
            best_tf = np.minimum(best_tf, k[:, tie_free].min(axis=1))
    return best, arg, best_tf


def _census_core(n: int, ranks: np.ndarray, workers: int = 1, batch: int = 128):
    if workers <= 1 or len(ranks) <= batch:
        return _sweep(n, ranks, 0, batch)
    step = math.ceil(len(ranks) / workers)
    spans = [(s, ranks[s:s + step]) for s in range(0, len(ranks), step)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda sp: _sweep(n, sp[1], sp[0], batch), spans))
    best, arg, best_tf = parts[0]
    for b2, a2, t2 in parts[1:]:
        # strict < keeps the earlier chunk on ties: same witness as a serial sweep
        better = b2 < best
        best = np.where(better, b2, best)
        arg = np.where(better, a2, arg)
        best_tf = np.minimum(best_tf, t2)
    return best, arg, best_tf


def _histogram(best: np.ndarray) -> tuple[dict[int, int], int]:
    ks, counts = np.unique(best, return_counts=True)
    hist = {int(k): int(c) for k, c in zip(ks, counts) if k != UNRESOLVED}
    unresolved = int(counts[ks == UNRESOLVED].sum())
    return hist, unresolved


def census_fixed(n: int, w: Direction) -> SeparabilityCensus:
    """Histogram of k over all functions for one direction; invalid ones unresolved."""
    _check_census_n(n)
    if w.n != n:
        raise ValueError(f"direction has {w.n} weights, expected {n}")
    ranks = _dense_ranks(np.array([w.numerators], dtype=np.int64), n)
    best, arg, best_tf = _sweep(n, ranks, 0, 1)
    hist, unresolved = _histogram(best)
    return SeparabilityCensus(n, "fixed-direction", str(w), hist, unresolved,
                              degenerate_only=0, n_directions=1, n_partitions=1,
                              best_k=best, witness=np.where(arg >= 0, 0, -1),
                              directions=(w,))


def census_best(n: int, ws: DirectionSet | Iterable[Direction], workers: int = 1,
                batch: int = 128) -> SeparabilityCensus:
    """Per function, the lowest valid k over ``ws``; histogram of those minima.

    ``degenerate_only`` counts functions whose minimum is reached only on
    partitions with merged (multi-vertex, label-pure) groups.
    """
    _check_census_n(n)
    dirs, gen = _collect(ws)
    if not dirs:
        raise ValueError("census_best needs at least one direction")
    if any(w.n != n for w in dirs):
        raise ValueError(f"all directions must have n={n} weights")
    uniq, reps = _unique_partitions(dirs)
    best, arg, best_tf = _census_core(n, uniq, workers=workers, batch=batch)
    hist, unresolved = _histogram(best)
    resolved = best != UNRESOLVED
    degenerate = int(np.count_nonzero(resolved & (best_tf > best)))
    witness_dirs = tuple(dirs[i] for i in reps)
    return SeparabilityCensus(n, "best-over-set", gen, hist, unresolved,
                              degenerate_only=degenerate, n_directions=len(dirs),
                              n_partitions=len(uniq), best_k=best, witness=arg,
                              directions=witness_dirs)


def tie_free_histogram(n: int, k: int) -> int:
    """Functions with k runs under a direction giving all vertices distinct projections."""
    nv = 1 << n
    return 2 * math.comb(nv - 1, k - 1)


# -- reports ----------------------------------------------------------------


def direction_label(w: Direction) -> str:
    return "".join(str(x) for x in w.weights)


@dataclass
class Table1Report:
    rows: list[tuple[str, int, int, int]]
    totals: tuple[int, int, int]
    distinct: tuple[int, int, int]
    best: SeparabilityCensus

    @property
    def projection_total(self) -> int:
        return sum(self.totals)

    def row(self, label: str) -> tuple[int, int, int]:
        for r in self.rows:
            if r[0] == label:
                return r[1:]
        raise KeyError(label)

    def to_json(self) -> dict:
        return {
            "rows": [{"direction": d, "k2": a, "k3": b, "k4": c} for d, a, b, c in self.rows],
            "totals": {"k2": self.totals[0], "k3": self.totals[1], "k4": self.totals[2]},
            "projection_total": self.projection_total,
            "distinct_functions": {"k2": self.distinct[0], "k3": self.distinct[1],
                                   "k4": self.distinct[2]},
            "distinct_total": sum(self.distinct),
            "remaining_after_projection_count": 256 - self.projection_total,
            "best_over_set": self.best.to_json(),
        }


def table1_report(n: int = 3) -> Table1Report:
    """Per canonical direction: how many functions it 2-, 3- and 4-separates.

    ``totals`` sum over directions (a function separated by two directions is
    counted twice); ``distinct`` counts functions k-separated by at least one
    direction.
    """
    if n != 3:
        raise ValueError("the Table 1 layout is defined for n=3 only")
    ds = canonical_directions(3)
    rows = []
    per_k_sets: dict[int, set[int]] = {2: set(), 3: set(), 4: set()}
    for w in ds:
        c = census_fixed(3, w)
        rows.append((direction_label(w), *c.counts((2, 3, 4))))
        for k in (2, 3, 4):
            per_k_sets[k].update(np.flatnonzero(c.best_k == k).tolist())
    totals = tuple(sum(r[i] for r in rows) for i in (1, 2, 3))
    distinct = tuple(len(per_k_sets[k]) for k in (2, 3, 4))
    return Table1Report(rows, totals, distinct, census_best(3, ds))


def direction_lower_bound(census: SeparabilityCensus | int, per_direction_max: int) -> int:
    """Fewest directions that could cover every linearly separable function."""
    if per_direction_max <= 0:
        raise ValueError("per_direction_max must be positive")
    count = census.histogram.get(2, 0) if isinstance(census, SeparabilityCensus) else int(census)
    return -(-count // per_direction_max)


def exact_separability_oracle(f: BooleanFunction) -> bool:
    """Exact linear separability by LP feasibility, independent of any direction set."""
    return exactlp.linearly_separable(f)


def separable_count(n: int) -> int:
    """Non-constant linearly separable functions, by the exact oracle."""
    _check_census_n(n)
    nv = 1 << n
    return sum(exact_separability_oracle(from_index(n, i)) for i in range(1, (1 << nv) - 1))


CONVENTIONS = ("pure", "perturbed-linear", "perturbed-binary")


def convention_set(n: int, convention: str) -> DirectionSet:
    if convention == "pure":
        return canonical_directions(n, signed=True)
    if convention == "perturbed-linear":
        return perturbed_canonical(n, "linear")
    if convention == "perturbed-binary":
        return perturbed_canonical(n, "binary")
    raise ValueError(f"unknown convention {convention!r}; use one of {CONVENTIONS}")


def convention_sweep(n: int, workers: int = 1) -> dict[str, SeparabilityCensus]:
    """Best-over-canonical censuses under every tie-handling convention."""
    return {c: census_best(n, convention_set(n, c), workers=workers) for c in CONVENTIONS}


def default_workers() -> int:
    env = os.environ.get("KSEP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
