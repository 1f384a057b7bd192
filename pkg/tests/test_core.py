from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from permhc.core import (
    INTEGERS,
    CanonicalKey,
    InputError,
    Instance,
    ModRing,
    ingest_matrix,
    ingest_multigraph,
    max_abs_weight,
    serialize_matrix,
    serialize_multigraph,
)


def test_parse_matrix():
    inst = ingest_matrix("2\n1 2\n3 4")
    assert inst.n == 2
    assert inst.rows() == [[1, 2], [3, 4]]
    assert inst.f(1, 2) == 2 and inst.f(2, 1) == 3


def test_parse_single_vertex():
    assert ingest_matrix("1\n7").rows() == [[7]]


def test_parse_short_row_names_line():
    with pytest.raises(InputError, match=r"line 3: row 2 has 1 of 2 entries"):
        ingest_matrix("2\n1 2\n3")


@pytest.mark.parametrize("text, needle", [
    ("", "missing vertex count"),
    ("x\n1", "line 1"),
    ("2\n1 2\n3 4\n5 6", "expected 2 matrix rows"),
    ("0\n", "vertex count must be >= 1"),
    ("2\n1 a\n3 4", "line 2"),
])
def test_parse_matrix_errors(text, needle):
    with pytest.raises(InputError, match=needle):
        ingest_matrix(text)


def test_comments_and_blank_lines_are_skipped():
    inst = ingest_matrix("# a comment\n2\n\n1 2\n# mid\n3 4\n")
    assert inst.rows() == [[1, 2], [3, 4]]


def test_multigraph_cycle():
    inst = ingest_multigraph("3 3\n1 2\n2 3\n3 1")
    assert inst.rows() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


def test_multigraph_parallel_arcs_aggregate():
    inst = ingest_multigraph("2 2\n1 2 5\n1 2 3")
    assert inst.f(1, 2) == 8


def test_multigraph_vertex_out_of_range():
    with pytest.raises(InputError, match="vertex 3"):
        ingest_multigraph("2 1\n1 3")


def test_multigraph_arc_count_mismatch():
    with pytest.raises(InputError, match="declares 2 arcs"):
        ingest_multigraph("2 2\n1 2")


@pytest.mark.parametrize("rows, expected", [
    ([[1, 2], [3, 4]], 4),
    ([[-7, 0], [2, 1]], 7),
    ([[0] * 3] * 3, 0),
])
def test_max_abs_weight(rows, expected):
    assert max_abs_weight(Instance.from_rows(rows)) == expected


def test_mod_instance_requires_normalized_entries():
    with pytest.raises(InputError):
        Instance(1, ((5,),), ModRing(5))
    inst = Instance.from_rows([[-3, 17]] * 2, ModRing(17))
    assert inst.rows() == [[14, 0]] * 2
    assert inst.ring_tag == "mod"


def test_non_square_rejected():
    with pytest.raises(InputError):
        Instance.from_rows([[1, 2], [3]])


def test_canonical_key_roundtrip():
    inst = Instance.from_rows([[1, 2], [0, 4]], ModRing(5))
    key = CanonicalKey.of(inst)
    assert str(key) == "2:5:1,2,0,4"
    assert key.to_instance() == inst
    assert CanonicalKey.of(key.to_instance()) == key


small_matrix = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-10**12, 10**12), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(small_matrix)
def test_matrix_serialization_roundtrip(rows):
    inst = Instance.from_rows(rows)
    assert ingest_matrix(serialize_matrix(inst, "header")) == inst


@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 10**6), min_size=n, max_size=n), min_size=n, max_size=n)
))
def test_multigraph_serialization_roundtrip(rows):
    inst = Instance.from_rows(rows)
    assert ingest_multigraph(serialize_multigraph(inst)) == inst


def test_integer_ring_is_default():
    assert Instance.from_rows([[1]]).ring == INTEGERS
