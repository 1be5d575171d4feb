#!/usr/bin/env python3
"""
Matrix model, regions, parsers and fixture generators
"""

import io

import numpy as np
import pytest

from src.errors import OutOfBoundsError, ParseError
from src.generators import random_matrix, shifted_copy_matrix, tiled_matrix
from src.matrix_io import (BitMatrix, Region, extract_region_oracle, log_k, padded_side,
                           parse_edgelist, parse_pbm, write_edgelist, write_pbm)


def test_padded_side():
    assert padded_side(1, 2) == 2
    assert padded_side(5, 2) == 8
    assert padded_side(8, 2) == 8
    assert padded_side(5, 4) == 16
    assert padded_side(17, 4) == 64
    assert log_k(64, 4) == 3
    with pytest.raises(ValueError):
        log_k(32, 4)


def test_region_parse_and_geometry():
    r = Region.parse("1,2,3,5")
    assert (r.x_min, r.y_min, r.x_max, r.y_max) == (1, 2, 3, 5)
    assert r.shape == (4, 3)
    assert r.shifted(1, 0) == Region(2, 2, 4, 5)
    assert Region(0, 0, 7, 7).contains(r)
    assert not Region(0, 0, 3, 3).contains(r)
    assert Region.square(2, 6, 2) == Region(2, 6, 3, 7)


@pytest.mark.parametrize("text", ["1,2,3", "a,b,c,d", "1,2,3,4,5"])
def test_region_parse_rejects_malformed(text):
    with pytest.raises(ParseError):
        Region.parse(text)


def test_region_rejects_empty_and_negative():
    with pytest.raises(OutOfBoundsError):
        Region(3, 0, 2, 0)
    with pytest.raises(OutOfBoundsError):
        Region.parse("-1,0,2,2")


def test_from_dense_pads_with_zeros():
    m = BitMatrix.from_dense([[1, 0, 1], [0, 1, 0]])
    assert (m.rows, m.cols, m.side) == (2, 3, 4)
    assert m.cells[:, 3].sum() == 0 and m.cells[2:].sum() == 0
    assert m.cell(2, 0) == 1
    assert m.ones == 3
    with pytest.raises(OutOfBoundsError):
        m.cell(4, 0)


def test_cells_are_read_only():
    m = BitMatrix.from_dense(np.eye(4, dtype=np.uint8))
    with pytest.raises(ValueError):
        m.cells[0, 1] = 1


def test_from_edges_uses_row_for_source():
    m = BitMatrix.from_edges([(0, 1), (1, 0), (2, 2)])
    assert m.cell(1, 0) == 1  # edge (0,1): x=1, y=0
    assert m.cell(0, 1) == 1
    assert m.edges() == [(0, 1), (1, 0), (2, 2)]
    assert (m.rows, m.side) == (3, 4)


def test_oracle_extracts_row_major():
    m = BitMatrix.from_dense(np.arange(16).reshape(4, 4) % 3 == 0)
    got = extract_region_oracle(m, Region(1, 2, 3, 3))
    assert got.tolist() == (m.cells[2:4, 1:4]).tolist()
    with pytest.raises(OutOfBoundsError):
        extract_region_oracle(m, Region(0, 0, 4, 0))


def test_parse_edgelist_with_comments():
    text = "# a comment\n% another\n0 1\n\n1 2\n2 0\n"
    m = parse_edgelist(io.StringIO(text))
    assert m.rows == 3
    assert m.edges() == [(0, 1), (1, 2), (2, 0)]


@pytest.mark.parametrize("text, line", [("0 1\n1\n", 2), ("0 x\n", 1), ("0 1\n-1 2\n", 2)])
def test_parse_edgelist_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_edgelist(io.StringIO(text))
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_parse_edgelist_empty():
    with pytest.raises(ParseError):
        parse_edgelist(io.StringIO("# nothing\n"))


@pytest.mark.parametrize("fmt", ["P1", "P4"])
def test_pbm_round_trip(fmt):
    m = random_matrix(13, 0.4, seed=3)
    buf = io.BytesIO()
    write_pbm(m, buf, fmt)
    back = parse_pbm(io.BytesIO(buf.getvalue()))
    assert back == m


def test_pbm_with_header_comment():
    data = b"P1\n# made by hand\n3 2\n1 0 1\n0 1 0\n"
    m = parse_pbm(io.BytesIO(data))
    assert m.logical.tolist() == [[1, 0, 1], [0, 1, 0]]


@pytest.mark.parametrize("data", [b"P2\n2 2\n0 0 0 0\n", b"P4\n16 2\n\x00", b"P1\n2 2\n1 0 1\n", b"P1\n2"])
def test_pbm_errors(data):
    with pytest.raises(ParseError):
        parse_pbm(io.BytesIO(data))


def test_write_edgelist_parses_back():
    m = BitMatrix.from_edges([(0, 3), (3, 0), (1, 1)])
    buf = io.StringIO()
    write_edgelist(m, buf)
    assert parse_edgelist(io.StringIO(buf.getvalue())) == m


def test_generators_are_seeded():
    assert random_matrix(32, 0.1, seed=5) == random_matrix(32, 0.1, seed=5)
    assert random_matrix(32, 0.1, seed=5) != random_matrix(32, 0.1, seed=6)

    tiled = tiled_matrix(32, 8, 0.3, seed=1)
    assert np.array_equal(tiled.cells[0:8, 0:8], tiled.cells[24:32, 16:24])

    shifted = shifted_copy_matrix(64, 8, 0.5, seed=2)
    assert shifted.rows == 64 and shifted.ones > 0
    with pytest.raises(ValueError):
        tiled_matrix(30, 8, 0.3)
