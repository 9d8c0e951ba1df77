import numpy as np
import pytest

from colorhomography.colorspace import rgb_to_rgi


def random_homography(rng, scale=0.3):
    """Perturbed identity; well conditioned on chromaticity-scale points."""
    while True:
        h = np.eye(3) + scale * rng.normal(size=(3, 3))
        if abs(np.linalg.det(h)) > 0.2:
            return h


def consistent_pairs(rng, h, n):
    """``n`` RGI source points and their exact images under ``h`` with w > 0.2."""
    src, dst = [], []
    while len(src) < n:
        c = rgb_to_rgi(rng.uniform(0.05, 1.0, 3))
        c = c / c[2]
        m = c @ h
        if m[2] > 0.2:
            src.append(c)
            dst.append(m)
    return np.array(src), np.array(dst)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
