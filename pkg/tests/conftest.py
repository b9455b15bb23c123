import time

import pytest

from ksep import enumeration as en

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
# fixture name -> seconds spent building it
TIMINGS: dict[str, float] = {}


def _timed(name, fn):
    t = time.perf_counter()
    out = fn()
    TIMINGS[name] = time.perf_counter() - t
    return out


@pytest.fixture(scope="session")
def workers():
    return en.default_workers()


@pytest.fixture(scope="session")
def grid4(workers):
    return _timed("grid4", lambda: en.census_best(4, en.fractional_grid(4), workers=workers))


@pytest.fixture(scope="session")
def grid3():
    return _timed("grid3", lambda: en.census_best(3, en.fractional_grid(3)))


@pytest.fixture(scope="session")
def oracle4():
    """Indices of non-constant n=4 functions accepted by the exact LP oracle."""
    from ksep.boolfn import from_index

    return _timed("oracle4", lambda: {i for i in range(1, (1 << 16) - 1)
                                      if en.exact_separability_oracle(from_index(4, i))})


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
