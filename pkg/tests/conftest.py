import pytest

from nicc import simulation, write_dataset


@pytest.fixture(scope="session")
def vitals_csv(tmp_path_factory):
    """Large synthetic clinical-style CSV shared by CLI and acceptance tests."""
    path = tmp_path_factory.mktemp("data") / "vitals_synthetic.csv"
    data = simulation.vitals_like_table(seed=20260809)
    write_dataset(path, data, response="died", cluster="patient_id")
    return str(path)


@pytest.fixture(scope="session")
def strong_cell_gaussian():
    """One strong-clustering gaussian dataset plus its generating truth."""
    cfg = simulation.SimConfig(
        family="gaussian",
        seed=simulation.iteration_seed(20260809, "fixture-strong-gaussian", 0),
        **simulation.SELECTION_CELL,
    )
    return simulation.generate(cfg)
