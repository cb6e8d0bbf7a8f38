import pytest

from bincp.data import figure1_path, load_dataset
from bincp.icp import build_calibration_table

# Own-class probability columns of the bundled figure1.csv fixture, in row
# order (negative rows first, then positive rows).
FIGURE1_NEG = [0.002, 0.15, 0.23, 0.40, 0.48, 0.70, 0.75, 0.80, 0.95, 0.98]
FIGURE1_POS = [0.01, 0.08, 0.21, 0.36, 0.43, 0.51, 0.64, 0.72, 0.75, 0.80, 0.95]


@pytest.fixture(scope="session")
def figure1():
    return load_dataset(figure1_path(), positive_class="B")


@pytest.fixture(scope="session")
def figure1_table(figure1):
    return build_calibration_table(figure1, mondrian=True)
