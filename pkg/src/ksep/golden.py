"""Reference census counts, embedded for offline ``--golden`` checks."""
from __future__ import annotations

TABLE1 = {
    "100": (2, 0, 0), "010": (2, 0, 0), "001": (2, 0, 0),
    "110": (4, 2, 0), "1-10": (4, 2, 0), "101": (4, 2, 0),
    "10-1": (4, 2, 0), "011": (4, 2, 0), "01-1": (4, 2, 0),
    "111": (6, 6, 2), "11-1": (6, 6, 2), "1-11": (6, 6, 2), "-111": (6, 6, 2),
}
TABLE1_TOTALS = (54, 36, 8)

# any tie-free direction
FIXED_N3 = {1: 2, 2: 14, 3: 42, 4: 70, 5: 70, 6: 42, 7: 14, 8: 2}
FIXED_N4_LOW = {1: 2, 2: 30, 3: 210, 4: 910, 5: 2730, 6: 6006, 7: 10010, 8: 12870}

BEST_N3_PERTURBED = {1: 2, 2: 102, 3: 126, 4: 26}
BEST_N4_CANONICAL = {1: 2, 2: 1228, 3: 6836, 4: 19110, 5: 25198, 6: 12014, 7: 1132, 8: 16}

GRID_N4_SEPARABLE = 1880
GRID_N4_MAX_K = 5
GRID_N4_DEGENERATE_ABOUT = 188

LOWER_BOUND_N3 = 8
LOWER_BOUND_N4 = 63


def diff_histogram(expected: dict[int, int], got: dict[int, int]) -> list[str]:
    lines = []
    for k in sorted(set(expected) | set(got)):
        e, g = expected.get(k, 0), got.get(k, 0)
        if e != g:
            lines.append(f"k={k}: expected {e}, got {g}")
    return lines
