import time

import numpy as np
import pytest

from reebkit.bounds import theorem_bound
from reebkit.field import height_field, make_excellent
from reebkit.generators import gen_sphere, gen_torus
from reebkit.levelsets import thickness
from reebkit.reeb import build_reeb
from reebkit.suite import suite_case

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class SuiteCache:
    """Lazily computed per-case artifacts shared by the whole session."""

    def __init__(self):
        self._cases = {}
        self._reeb = {}
        self._thickness = {}
        self._report = {}
        self.seconds = {}

    def _timed(self, name, fn):
        t = time.perf_counter()
        out = fn()
        self.seconds[name] = self.seconds.get(name, 0.0) + time.perf_counter() - t
        return out

    def case(self, name):
        if name not in self._cases:
            self._cases[name] = self._timed(name, lambda: suite_case(name))
        return self._cases[name]

    def reeb(self, name):
        if name not in self._reeb:
            c = self.case(name)
            self._reeb[name] = self._timed(name, lambda: build_reeb(c.field))
        return self._reeb[name]

    def thickness(self, name):
        if name not in self._thickness:
            c = self.case(name)
            self._thickness[name] = self._timed(name, lambda: thickness(c.field))
        return self._thickness[name]

    def report(self, name):
        if name not in self._report:
            c = self.case(name)
            g, q = self.reeb(name)
            th = self.thickness(name)
            self._report[name] = self._timed(
                name, lambda: theorem_bound(c.mesh, c.field, c.p, g, q, thickness_result=th))
        return self._report[name]


@pytest.fixture(scope="session")
def suite():
    return SuiteCache()


@pytest.fixture(scope="session")
def sphere3():
    return gen_sphere(1.0, 3)


@pytest.fixture(scope="session")
def sphere3_height(sphere3):
    return make_excellent(height_field(sphere3))


@pytest.fixture(scope="session")
def sphere3_reeb(sphere3_height):
    return build_reeb(sphere3_height)


@pytest.fixture(scope="session")
def torus_standing():
    return gen_torus(orientation="standing")


@pytest.fixture(scope="session")
def torus_height(torus_standing):
    return make_excellent(height_field(torus_standing))


@pytest.fixture(scope="session")
def torus_reeb(torus_height):
    return build_reeb(torus_height)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
