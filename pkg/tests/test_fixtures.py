import numpy as np
import pytest

from app.errors import DimensionError
from app.fixtures import format_float, read_matrix, read_vector, write_matrix, write_vector


def test_matrix_file_is_lossless(tmp_path, rng):
    A = rng.standard_normal((3, 4)) / 7.0
    path = tmp_path / "A.txt"
    write_matrix(path, A)
    assert path.read_text().splitlines()[0] == "3 4"
    np.testing.assert_array_equal(read_matrix(path), A)


def test_vector_file_is_single_column(tmp_path):
    path = tmp_path / "x.txt"
    write_vector(path, [0.1, -2.0, 3.0])
    assert path.read_text().splitlines()[0] == "3 1"
    np.testing.assert_array_equal(read_vector(path), [0.1, -2.0, 3.0])


def test_format_float_uses_17_digits():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(1 / 3)) == 1 / 3


@pytest.mark.parametrize(
    "text",
    ["2 2\n1 2\n", "2 2\n1 2\n3\n", "2\n1 2\n3 4\n"],
)
def test_read_matrix_rejects_malformed_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(DimensionError):
        read_matrix(path)


def test_read_vector_rejects_matrix(tmp_path):
    path = tmp_path / "A.txt"
    write_matrix(path, np.eye(2))
    with pytest.raises(DimensionError):
        read_vector(path)
