"""Text formats: golden strings, round trips, and parse failures."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsurgery import formats, gadgets, multicycle
from qsurgery.f2 import BitMatrix, BitVector
from qsurgery.formats import FormatError
from qsurgery.homology import ChainComplex
from test_csscode import steane
from test_surgery import random_code, random_gauging


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


def test_matrix_golden_text():
    m = BitMatrix.from_dense([[1, 0, 1], [0, 1, 1]])
    assert formats.dump_matrix(m) == "matrix\nshape 2 3\n101\n011\n"


def test_matrix_load_tolerates_comments_and_blanks():
    text = "# a parity matrix\nmatrix\n\nshape 2 3   # rows cols\n101\n\n011\n"
    assert formats.load_matrix(text) == BitMatrix.from_dense([[1, 0, 1], [0, 1, 1]])


@pytest.mark.parametrize("shape", [(0, 5), (3, 0), (0, 0)])
def test_matrix_empty_shapes_round_trip(shape):
    m = BitMatrix.zeros(*shape)
    out = formats.load_matrix(formats.dump_matrix(m))
    assert (out.rows, out.cols) == shape
    assert out == m


@pytest.mark.parametrize(
    "text, msg",
    [
        ("matrix\nsize 2 3\n10\n01", "shape"),
        ("matrix\nshape 2 3\n101", "unexpected end"),
        ("matrix\nshape 1 3\n10", "0/1 string"),
        ("matrix\nshape 1 3\n1x1", "0/1 string"),
        ("matrix\nshape 1 2\n10\n11", "trailing"),
        ("complex\nshape 1 2\n10", "expected 'matrix'"),
    ],
)
def test_matrix_parse_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        formats.load_matrix(text)


@given(
    st.integers(0, 6).flatmap(
        lambda r: st.integers(0, 9).flatmap(
            lambda c: st.lists(
                st.lists(st.integers(0, 1), min_size=c, max_size=c),
                min_size=r,
                max_size=r,
            )
        )
    )
)
def test_matrix_round_trip(rows):
    cols = len(rows[0]) if rows else 0
    m = BitMatrix.from_dense(np.array(rows, np.uint8).reshape(len(rows), cols))
    assert formats.load_matrix(formats.dump_matrix(m)) == m


# ---------------------------------------------------------------------------
# complexes and chain maps
# ---------------------------------------------------------------------------


def test_complex_round_trip_gadget():
    code, recipe = multicycle.case_study()
    d, m = gadgets.build_gadget(code, recipe)
    assert formats.load_complex(formats.dump_complex(d)) == d
    assert formats.load_chain_map(formats.dump_chain_map(m)) == m


def test_complex_single_level():
    c = ChainComplex((4,), ())
    assert formats.load_complex(formats.dump_complex(c)) == c


def test_complex_boundary_shape_mismatch():
    text = "complex\ndegrees 2 2\nboundary 1\nshape 2 3\n101\n011\n"
    with pytest.raises(FormatError, match="expected 2x2"):
        formats.load_complex(text)


def test_chain_map_round_trip_keeps_shift():
    code, _ = multicycle.case_study()
    rng = np.random.default_rng(7)
    pair = random_gauging(rng, steane())
    assert pair is not None
    _, m = pair
    back = formats.load_chain_map(formats.dump_chain_map(m))
    assert back.shift == m.shift
    assert back == m


# ---------------------------------------------------------------------------
# codes
# ---------------------------------------------------------------------------


def test_code_round_trip_with_and_without_metas():
    study, _ = multicycle.case_study()
    assert study.mx is not None and study.mz is not None
    assert formats.load_code(formats.dump_code(study)) == study
    plain = steane()
    back = formats.load_code(formats.dump_code(plain))
    assert back == plain and back.mx is None and back.mz is None


def test_code_round_trip_random():
    rng = np.random.default_rng(20260815)
    for _ in range(25):
        code = random_code(rng)
        assert formats.load_code(formats.dump_code(code)) == code


@pytest.mark.parametrize(
    "text, msg",
    [
        ("code\nhx none\nhz none\nmx none\nmz none", "hx cannot be none"),
        ("code\nhz\nshape 0 2\nhx\nshape 0 2\nmx none\nmz none", "expected the hx"),
        ("code\nhx extra stuff\n", "cannot parse block header"),
    ],
)
def test_code_parse_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        formats.load_code(text)


# ---------------------------------------------------------------------------
# recipes
# ---------------------------------------------------------------------------


def test_recipe_round_trip_case_study():
    _, recipe = multicycle.case_study()
    back = formats.load_recipe(formats.dump_recipe(recipe))
    assert back == recipe


def test_recipe_round_trip_gauging():
    recipe = gadgets.GadgetRecipe(
        "gauging",
        BitVector.from_support(7, [0, 2, 5]),
        edges=((0, 1), (1, 2), (0, 2)),
    )
    assert formats.load_recipe(formats.dump_recipe(recipe)) == recipe
    # complete-graph default: no edges line at all
    bare = gadgets.GadgetRecipe("gauging", BitVector.from_support(5, [1, 3]))
    text = formats.dump_recipe(bare)
    assert "edges" not in text
    assert formats.load_recipe(text) == bare


def test_recipe_golden_text():
    recipe = gadgets.GadgetRecipe(
        "gauging", BitVector.from_support(4, [0, 3]), edges=((0, 1),)
    )
    assert formats.dump_recipe(recipe) == (
        "recipe gauging\nlength 4\nlogical 0 3\nedges 0-1\n"
    )


def test_recipe_dump_refuses_branched():
    recipe = gadgets.GadgetRecipe("branched-assembly", BitVector.zeros(3))
    with pytest.raises(FormatError, match="no file form"):
        formats.dump_recipe(recipe)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("recipe teleport\nlength 3\nlogical 0", "no file form"),
        ("recipe gauging\nlength 3\nedges 0-1", "missing a logical"),
        ("recipe gauging\nlength 3\nlogical 0 1\nedges 0:1", "edge token"),
        ("recipe gauging\nlength 3\nlogical 0\nlogical 1", "duplicate logical"),
        ("recipe subcomplex\nlength 3\nlogical 0\ncolour red", "unknown recipe field"),
        ("recipe gauging\nlogical 0 1", "length"),
    ],
)
def test_recipe_parse_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        formats.load_recipe(text)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def test_experiment_round_trip():
    s = formats.ExperimentSettings("fast", 1, (3e-3, 5e-3, 1e-2), 20000, 7)
    assert formats.load_experiment(formats.dump_experiment(s)) == s


def test_experiment_golden_parse():
    text = "# knobs\nscheme=standard\nrounds=3\nrates=0.003, 0.01\nshots=100\nseed=11\n"
    s = formats.load_experiment(text)
    assert s == formats.ExperimentSettings("standard", 3, (0.003, 0.01), 100, 11)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("scheme=fast\nrounds=1\nrates=0.01\nshots=5", "missing keys: seed"),
        ("scheme=fast\nrounds=1\nrates=0.01\nshots=5\nseed=1\ncolour=red", "unknown"),
        ("scheme=fast\nscheme=slow\nrounds=1\nrates=0.01\nshots=5\nseed=1", "duplicate"),
        ("scheme=fast\nrounds=0\nrates=0.01\nshots=5\nseed=1", "rounds"),
        ("scheme=fast\nrounds=1\nrates=0.7\nshots=5\nseed=1", "0, 0.5"),
        ("scheme=fast\nrounds=1\nrates=\nshots=5\nseed=1", "empty"),
        ("just a line", "key=value"),
    ],
)
def test_experiment_parse_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        formats.load_experiment(text)


# ---------------------------------------------------------------------------
# result CSV
# ---------------------------------------------------------------------------


def _rows():
    return [
        {
            "scheme": "fast",
            "rounds": 1,
            "p": 0.003,
            "shots": 20000,
            "failures": 17,
            "rate": 17 / 20000,
            "ci_low": 0.0004,
            "ci_high": 0.0013,
        },
        {
            "scheme": "standard",
            "rounds": 3,
            "p": 0.01,
            "shots": 20000,
            "failures": 160,
            "rate": 0.008,
            "ci_low": 0.006,
            "ci_high": 0.01,
        },
    ]


def test_csv_round_trip_and_header():
    text = formats.write_results_csv(_rows())
    assert text.splitlines()[0] == "scheme,rounds,p,shots,failures,rate,ci_low,ci_high"
    back = formats.read_results_csv(text)
    assert back == _rows()
    # deterministic: dumping the same rows twice is byte-identical
    assert formats.write_results_csv(_rows()) == text


def test_csv_errors():
    with pytest.raises(FormatError, match="missing column 'failures'"):
        formats.write_results_csv([{k: v for k, v in _rows()[0].items() if k != "failures"}])
    with pytest.raises(FormatError, match="missing column"):
        formats.read_results_csv("scheme,rounds\nfast,1\n")
    with pytest.raises(FormatError, match="empty"):
        formats.read_results_csv("")
    bad = formats.write_results_csv(_rows()).replace("17", "seventeen")
    with pytest.raises(FormatError, match="cannot parse column"):
        formats.read_results_csv(bad)
