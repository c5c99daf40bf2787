"""Shared fixtures: solver contexts are expensive (dense 784x784 SVD per
steady-state solve), so they are session-scoped and shared across modules."""

from __future__ import annotations

import logging

import numpy as np
import pytest

from obsflow.config import parse_config
from obsflow.sweep import SolverContext

# Redfield steady states at strong observer coupling carry small negative
# eigenvalues by construction; the solver logs them.  Keep test output clean.
logging.getLogger("obsflow").setLevel(logging.ERROR)


def make_context(text: str) -> SolverContext:
    return SolverContext(parse_config(text))


@pytest.fixture(scope="session")
def flat_ctx() -> SolverContext:
    """Flat device, no observer, all defaults."""
    return make_context('device = "flat"\n')


@pytest.fixture(scope="session")
def flat_beta_ctx() -> SolverContext:
    return make_context('device = "flat"\n[observer]\nsite = "beta"\n')


@pytest.fixture(scope="session")
def ratchet_ctx() -> SolverContext:
    return make_context('device = "ratchet"\n')


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260824)


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    """A random full-rank density matrix (Wishart construction)."""
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A + A.conj().T


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import CRITERION_LINES
    except ImportError:
        return
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
