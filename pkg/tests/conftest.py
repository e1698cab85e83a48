import math

import numpy as np
import pytest

from gbct.granular_ball import BallSet, GranularBall

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_RESULTS = []


def make_balls(centers, radii, sizes=None, log_density=None):
    """BallSet built directly from centers and radii.

    Ball i owns points [sum(sizes[:i]), ...). Stats other than center and
    radius are placeholders unless ``log_density`` is given.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim == 1:
        centers = centers[:, None]
    m = centers.shape[0]
    sizes = [2] * m if sizes is None else list(sizes)
    balls, start = [], 0
    for i in range(m):
        members = np.arange(start, start + sizes[i])
        start += sizes[i]
        r = float(radii[i])
        if log_density is not None:
            ld = float(log_density[i])
        else:
            ld = math.log(sizes[i]) - centers.shape[1] * math.log(r) if r > 0 else math.inf
        balls.append(GranularBall(members, centers[i], r, r, ld, ld, 1.0))
    return BallSet(tuple(balls), start, centers.shape[1])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    def _record(crit, ok, detail):
        ACCEPTANCE_RESULTS.append((crit, bool(ok), detail))
        print(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return _record
