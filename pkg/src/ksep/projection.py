"""Projection of hypercube vertices and real vectors onto a line.

Directions carry exact rational weights as integer numerators over a common
denominator, so projecting a 0/1 vertex is integer arithmetic and equal
projections are detected exactly.  A group of equal projections holding both
classes makes the direction invalid for that labelling; it is never treated
as approximately separated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from numbers import Rational
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .boolfn import BooleanFunction, Label, vertex_coordinates

INF = math.inf


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite weight {x!r}")
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational weight")


@dataclass(frozen=True)
class Direction:
    """Weight vector ``numerators / denominator``; never normalized implicitly."""

    numerators: tuple[int, ...]
    denominator: int = 1
    tag: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.denominator < 1:
            raise ValueError("denominator must be >= 1")
        if not self.numerators or not any(self.numerators):
            raise ValueError("direction must have at least one non-zero weight")

    @classmethod
    def of(cls, values: Iterable, tag: str | None = None) -> "Direction":
        fr = [_to_fraction(v) for v in values]
        if not fr:
            raise ValueError("direction needs at least one weight")
        den = reduce(math.lcm, (q.denominator for q in fr), 1)
        return cls(tuple(int(q * den) for q in fr), den, tag)

    @classmethod
    def parse(cls, text: str, tag: str | None = None) -> "Direction":
        """Parse ``"3/4,1,-1/4"`` style comma-separated weights."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        try:
            return cls.of(parts, tag=tag)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad direction {text!r}: {exc}") from None

    @property
    def n(self) -> int:
        return len(self.numerators)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(a, self.denominator) for a in self.numerators)

    def as_floats(self) -> np.ndarray:
        return np.array(self.numerators, dtype=float) / self.denominator

    def norm2(self) -> Fraction:
        return Fraction(sum(a * a for a in self.numerators), self.denominator ** 2)

    def __neg__(self) -> "Direction":
        return Direction(tuple(-a for a in self.numerators), self.denominator, self.tag)

    def scaled(self, factor) -> "Direction":
        c = _to_fraction(factor)
        if c == 0:
            raise ValueError("scale factor must be non-zero")
        return Direction.of((c * w for w in self.weights), tag=self.tag)

    def project_vertex(self, v: int) -> int:
        """Projection of vertex ``v`` times the denominator (an exact integer)."""
        n = self.n
        return sum(a for i, a in enumerate(self.numerators) if v >> (n - 1 - i) & 1)

    def label(self) -> str:
        return ",".join(str(w) for w in self.weights)

    def to_json(self) -> dict:
        out = {"weights": [str(w) for w in self.weights]}
        if self.tag:
            out["tag"] = self.tag
        return out

    def __str__(self) -> str:
        return f"({self.label()})"


@dataclass(frozen=True)
class Group:
    value: object
    members: tuple[int, ...]
    label: Label


@dataclass(frozen=True)
class Run:
    label: Label
    groups: int
    size: int


@dataclass(frozen=True)
class ProjectionProfile:
    groups: tuple[Group, ...]
    valid: bool
    k: int | None
    min_gap: object | None
    runs: tuple[Run, ...]

    @property
    def run_pattern(self) -> tuple[tuple[Label, int], ...]:
        return tuple((r.label, r.groups) for r in self.runs)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(r.size for r in self.runs)

    def pattern_string(self, plus: str = "1", minus: str = "0", reverse: bool = False) -> str:
        """Runs as digit blocks, e.g. ``"11 0 11 000"``; empty when invalid."""
        if not self.valid:
            return ""
        runs = reversed(self.runs) if reverse else self.runs
        return " ".join((plus if r.label is Label.PLUS else minus) * r.size for r in runs)

    def to_json(self) -> dict:
        def num(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        return {
            "valid": self.valid,
            "k": self.k,
            "min_gap": None if self.min_gap is None else num(self.min_gap),
            "groups": [
                {"value": num(g.value), "members": list(g.members), "label": g.label.value}
                for g in self.groups
            ],
            "runs": [{"label": r.label.value, "groups": r.groups, "size": r.size} for r in self.runs],
        }


class ThreeSepParams(NamedTuple):
    a: float
    b: float

    @classmethod
    def checked(cls, a, b) -> "ThreeSepParams":
        if not a < b:
            raise ValueError(f"interval edges must satisfy a < b, got a={a}, b={b}")
        return cls(a, b)

    @property
    def t(self):
        return (self.a + self.b) / 2


def _build(values: Sequence, labels: Sequence[Label], atol=0) -> ProjectionProfile:
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    groups: list[Group] = []
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and values[order[stop]] - values[order[stop - 1]] <= atol:
            stop += 1
        members = tuple(sorted(order[start:stop]))
        present = {labels[i] for i in members}
        label = present.pop() if len(present) == 1 else Label.MIXED
        groups.append(Group(values[order[start]], members, label))
        start = stop

    valid = all(g.label is not Label.MIXED for g in groups)
    runs: list[Run] = []
    for g in groups:
        if runs and runs[-1].label is g.label:
            last = runs[-1]
            runs[-1] = Run(last.label, last.groups + 1, last.size + len(g.members))
        else:
            runs.append(Run(g.label, 1, len(g.members)))
    k = len(runs) if valid else None
    min_gap = None
    if valid and k >= 2:
        min_gap = min(
            b.value - a.value for a, b in zip(groups, groups[1:]) if a.label is not b.label
        )
    return ProjectionProfile(tuple(groups), valid, k, min_gap, tuple(runs))


def profile(f: BooleanFunction, w: Direction) -> ProjectionProfile:
    if w.n != f.n:
        raise ValueError(f"direction has {w.n} weights, function has n={f.n}")
    values = [Fraction(w.project_vertex(v), w.denominator) for v in range(f.n_vertices)]
    labels = [f.label(v) for v in range(f.n_vertices)]
    return _build(values, labels)


def _as_label(y) -> Label:
    if isinstance(y, Label):
        if y is Label.MIXED:
            raise ValueError("points must carry a pure class label")
        return y
    if isinstance(y, str):
        return Label(y)
    return Label.PLUS if y else Label.MINUS


def profile_points(points, labels, w, atol=0) -> ProjectionProfile:
    """Profile of labelled real vectors projected on ``w``.

    Projections closer than ``atol`` chain into one group.  With ``atol=0``,
    an exact :class:`Direction` and integer or rational coordinates the result
    is exact.
    """
    pts = list(points)
    if not pts:
        raise ValueError("profile_points needs at least one point")
    labs = [_as_label(y) for y in labels]
    if len(labs) != len(pts):
        raise ValueError("points and labels differ in length")
    exact = isinstance(w, Direction) and all(
        isinstance(c, (int, np.integer, Fraction)) for p in pts for c in p
    )
    dim = w.n if isinstance(w, Direction) else len(w)
    if any(len(p) != dim for p in pts):
        raise ValueError(f"all points must have dimension {dim}")
    if exact:
        ws = w.weights
        values = [sum((Fraction(int(c)) if not isinstance(c, Fraction) else c) * wi
                      for c, wi in zip(p, ws)) for p in pts]
    else:
        wf = w.as_floats() if isinstance(w, Direction) else np.asarray(w, dtype=float)
        values = (np.asarray(pts, dtype=float) @ wf).tolist()
    return _build(values, labs, atol)


def profile_vertices(f: BooleanFunction, w) -> ProjectionProfile:
    """Profile of ``f`` for real-valued ``w`` (floats); exact for a Direction."""
    if isinstance(w, Direction):
        return profile(f, w)
    pts = [vertex_coordinates(f.n, v) for v in range(f.n_vertices)]
    return profile_points(pts, [f.label(v) for v in range(f.n_vertices)], w)


class MarginScore(NamedTuple):
    k: int
    min_gap: object
    smallest_cluster: int


def margin_score(p: ProjectionProfile) -> MarginScore:
    """Lexicographic quality: fewer intervals, wider gap, larger smallest cluster."""
    if not p.valid:
        raise ValueError("margin_score needs a valid (label-pure) profile")
    gap = INF if p.min_gap is None else p.min_gap
    return MarginScore(p.k, gap, min(p.cluster_sizes))


def margin_key(p: ProjectionProfile, rule: str = "lowest_k"):
    """Sort key (ascending is better).

    ``"lowest_k"`` is the default ordering.  ``"larger_clusters"`` ranks the
    smallest cluster first so a split with more intervals but bigger small
    clusters can win; it is an opt-in alternative only.
    """
    s = margin_score(p)
    if rule == "lowest_k":
        return (s.k, -s.min_gap, -s.smallest_cluster)
    if rule == "larger_clusters":
        return (-s.smallest_cluster, -s.min_gap, s.k)
    raise ValueError(f"unknown margin rule {rule!r}")


def normalized_gap2(p: ProjectionProfile, w: Direction):
    """Squared min gap over squared norm of ``w``: a scale-free exact margin."""
    if p.min_gap is None:
        return INF
    return Fraction(p.min_gap) ** 2 / w.norm2()


@dataclass(frozen=True)
class MinKResult:
    k: int | None
    best: tuple[Direction, ...]
    profiles: tuple[ProjectionProfile, ...]

    @property
    def unresolved(self) -> bool:
        return self.k is None


def min_k_over(f: BooleanFunction, ws: Sequence[Direction]) -> MinKResult:
    """Lowest valid k over ``ws``; winners sorted by decreasing scale-free margin."""
    ws = list(ws)
    if not ws:
        raise ValueError("min_k_over needs at least one direction")
    scored = []
    for i, w in enumerate(ws):
        p = profile(f, w)
        if p.valid:
            scored.append((p.k, i, w, p))
    if not scored:
        return MinKResult(None, (), ())
    k = min(s[0] for s in scored)
    winners = [s for s in scored if s[0] == k]
    winners.sort(key=lambda s: (-normalized_gap2(s[3], s[2]), -min(s[3].cluster_sizes), s[1]))
    return MinKResult(k, tuple(s[2] for s in winners), tuple(s[3] for s in winners))
