import numpy as np
import pytest

from comars import designs, optimizer

# Frozen seed for every seeded run in the suite.  The SSQ optimum at m=8 is
# attained by two distinct frequency vectors; this seed makes the tie resolve
# to the published one, and determinism keeps it stable.
SEED = 2


@pytest.fixture(scope="session")
def paley8():
    return designs.paley_conference(7)


@pytest.fixture(scope="session")
def parent_m7(paley8):
    return paley8.drop_columns(7)


@pytest.fixture(scope="session")
def body_m7(parent_m7):
    return designs.foldover(parent_m7)


@pytest.fixture(scope="session")
def body_m8(paley8):
    return designs.foldover(paley8)


@pytest.fixture(scope="session")
def body_m5():
    parent = designs.paley_conference(5).drop_columns(5)
    return designs.foldover(parent)


@pytest.fixture(scope="session")
def reference_csv():
    return designs.bundled_data_path("comars_7f_34runs.csv")


@pytest.fixture(scope="session")
def reference_design(reference_csv):
    return designs.load_design_csv(reference_csv)


def _run(body, objective, n0=1, restarts=100):
    config = optimizer.SearchConfig(objective=objective, restarts=restarts, seed=SEED)
    return optimizer.optimize(body, body, n0, config)


@pytest.fixture(scope="session")
def m7_f_run(body_m7):
    return _run(body_m7, "f")


@pytest.fixture(scope="session")
def m7_s_run(body_m7):
    return _run(body_m7, "ssq")


@pytest.fixture(scope="session")
def m8_s_run(body_m8):
    return _run(body_m8, "ssq")


@pytest.fixture(scope="session")
def m8_f_run(body_m8):
    return _run(body_m8, "f")


@pytest.fixture()
def rng():
    return np.random.default_rng(SEED)
