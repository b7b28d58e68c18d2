"""Shared fixtures; the two bundled pipelines are solved once per session."""

import pytest

import lagrforge as lf


@pytest.fixture(scope="session")
def so2_spec():
    return lf.parse(lf.bundled_source("so2"))


@pytest.fixture(scope="session")
def so2_lie(so2_spec):
    return lf.constraints(so2_spec)


@pytest.fixture(scope="session")
def so2_family(so2_lie):
    return lf.solve_family(so2_lie, lf.build_ansatz(so2_lie, deg_x=1,
                                                    deg_g=(0, 0)))


@pytest.fixture(scope="session")
def affine_spec():
    return lf.parse(lf.bundled_source("affine1"))


@pytest.fixture(scope="session")
def affine_lie(affine_spec):
    return lf.constraints(affine_spec)


@pytest.fixture(scope="session")
def affine_family(affine_lie):
    return lf.solve_family(affine_lie, lf.build_ansatz(affine_lie, deg_x=1,
                                                       deg_g=(-1, 0)))
