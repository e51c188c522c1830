"""
행렬/벡터 텍스트 파일 형식

첫 줄은 `rows cols`, 이후 한 줄에 한 행씩 공백으로 구분된 10진수 리터럴.
17 유효숫자로 쓰므로 float64 가 정확히 왕복한다. 벡터는 cols = 1 인 행렬로 저장한다.
"""

from pathlib import Path
from typing import Union

import numpy as np

from app.errors import DimensionError
from app.linalg import as_matrix, as_vector

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    return "%.17g" % value


def write_matrix(path: PathLike, A) -> None:
    A = as_matrix(A)
    rows, cols = A.shape
    with open(path, "w") as f:
        f.write(f"{rows} {cols}\n")
        for row in A:
            f.write(" ".join(format_float(v) for v in row) + "\n")


def read_matrix(path: PathLike) -> np.ndarray:
    with open(path) as f:
        header = f.readline().split()
        lines = [line for line in f if line.strip()]
    if len(header) != 2:
        raise DimensionError(f"{path}: first line must be 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if len(lines) != rows:
        raise DimensionError(f"{path}: header says {rows} rows, found {len(lines)}")
    values = [[float(tok) for tok in line.split()] for line in lines]
    if any(len(row) != cols for row in values):
        raise DimensionError(f"{path}: every row must have {cols} entries")
    return as_matrix(values)


def write_vector(path: PathLike, v) -> None:
    v = as_vector(v)
    write_matrix(path, v.reshape(-1, 1))


def read_vector(path: PathLike) -> np.ndarray:
    A = read_matrix(path)
    if A.shape[1] != 1:
        raise DimensionError(f"{path}: expected a single column, got {A.shape[1]}")
    return as_vector(A[:, 0])
