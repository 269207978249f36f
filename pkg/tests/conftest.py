import numpy as np
import pytest

from qrewrite import (
    Space, default_registry, parse_term, random_ground_term,
    ScalarSort, VectorSort, OperatorSort,
)


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def table1_row1():
    return parse_term(
        "apply(projector(V:alpha@a, V:alpha@a), "
        "timesV(1/sqrt2, plusV(V:beta@a, timesV(-1, V:gamma@a))))")


@pytest.fixture(scope="session")
def table1_row9():
    return parse_term(
        "timesV(timesS(1/sqrt2, plusS(ip(V:alpha@a, V:beta@a), "
        "timesS(-1, ip(V:alpha@a, V:gamma@a)))), V:alpha@a)")


TELEPORT_START = (
    "apply(compose(tensorO(tensorO(O:h@a2, O:id@a), O:id@b), "
    "tensorO(O:c@a2*a, O:id@b)), "
    "tensorV(plusV(timesV(S:alpha, V:0@a2), timesV(S:beta, V:1@a2)), "
    "timesV(1/sqrt2, plusV(tensorV(V:0@a, V:0@b), tensorV(V:1@a, V:1@b)))))")

TELEPORT_FINAL = (
    "timesV(1/2, plusV(plusV("
    "tensorV(tensorV(V:1@a2, V:0@a), plusV(timesV(S:alpha, V:0@b), "
    "timesV(timesS(-1, S:beta), V:1@b))), "
    "plusV("
    "tensorV(tensorV(V:0@a2, V:1@a), plusV(timesV(S:alpha, V:1@b), "
    "timesV(S:beta, V:0@b))), "
    "tensorV(tensorV(V:1@a2, V:1@a), plusV(timesV(S:alpha, V:1@b), "
    "timesV(timesS(-1, S:beta), V:0@b))))), "
    "tensorV(tensorV(V:0@a2, V:0@a), plusV(timesV(S:alpha, V:0@b), "
    "timesV(S:beta, V:1@b)))))")


@pytest.fixture(scope="session")
def teleport_start():
    return parse_term(TELEPORT_START)


@pytest.fixture(scope="session")
def teleport_final():
    return parse_term(TELEPORT_FINAL)


def random_sort(rng: np.random.Generator, labels=("a", "b", "c")) -> object:
    k = int(rng.integers(1, 3))
    picked = rng.choice(len(labels), size=k, replace=False)
    space = Space(tuple(labels[int(i)] for i in picked))
    return [ScalarSort(), VectorSort(space), OperatorSort(space)][
        int(rng.integers(0, 3))]


def random_term(rng: np.random.Generator, depth: int = 3,
                labels=("a", "b", "c")):
    return random_ground_term(random_sort(rng, labels), rng, depth=depth,
                              ambient_labels=labels)
