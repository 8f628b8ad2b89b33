import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

CRITERIA = {
    1: "boosted transform of u^2 matches the closed form (SO and U)",
    2: "magic formulas, 4 formulas x 4 families, basis independent",
    3: "finite-difference Laplacian matches D_N on trace polynomials",
    4: "word generator matches finite differences, degree preserved",
    5: "concentration onto the trace evaluation, slope -2",
    6: "finite-N transform tends to the free transform, slope -2",
    7: "moment limits (rate, Monte-Carlo agreement, complex time)",
    8: "product rule, exponential homomorphism, DN structure, H o G = id",
    9: "symplectic counterexample matrices reproduced exactly",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes.setdefault(n, []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            continue
        ok = all(p for _, p in results)
        failed = [name for name, p in results if not p]
        line = f"ACCEPTANCE criterion {n}: {'PASS' if ok else 'FAIL'}  {CRITERIA[n]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
