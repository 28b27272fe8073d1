import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from tpmkit import fixtures
from tpmkit.errors import RatingLookupError, ValidationError
from tpmkit.matrix_core import TransitionMatrix
from tpmkit.rating_schema import AGENCY8, IRC7, RatingMap, RatingSchema, absorb_state, map_external_rating


@pytest.fixture(scope="module")
def rmap():
    return fixtures.load_rating_map()


def test_schema_invariants():
    assert IRC7.default_index == 6
    assert IRC7.default_label == "D"
    with pytest.raises(ValidationError):
        RatingSchema(("A",))
    with pytest.raises(ValidationError):
        RatingSchema(("A", "A", "D"))
    with pytest.raises(ValidationError):
        RatingSchema(("A", "", "D"))


@pytest.mark.parametrize(
    "scheme,label,expected",
    [("Moody's", "BAA2", "BBB"), ("S&P", "AAA", "AAA"), ("S&P", "CC", "D"), ("Moody's", "CAA3", "CCC")],
)
def test_map_external_rating(rmap, scheme, label, expected):
    assert map_external_rating(rmap, scheme, label) == expected


def test_unknown_pair_names_it(rmap):
    with pytest.raises(RatingLookupError, match="BAA9"):
        map_external_rating(rmap, "Moody's", "BAA9")


def test_all_moodys_labels_resolve(rmap):
    moodys = [lab for (scheme, lab) in rmap.entries if scheme == "Moody's"]
    # 25 rows, UNRATE appears twice
    assert len(moodys) == 24
    for lab in moodys:
        assert map_external_rating(rmap, "Moody's", lab) in AGENCY8.labels
    assert len(rmap.internal_ids) == 25


def test_map_rejects_foreign_internal_label():
    with pytest.raises(ValidationError):
        RatingMap({("x", "y"): "ZZZ"}, IRC7)


def test_buckets_follow_internal_ids(rmap):
    b = rmap.buckets()
    assert b["AAA"] == [1]
    assert b["AA"] == [2, 3, 4]
    assert b["CCC"] == [17, 18, 19]
    assert b["D"] == [20, 21, 22, 23, 24, 25]


def test_absorb_ccc_rows_from_reference_table():
    t1 = fixtures.load_tpm("TPM_1", validate=False)
    t2 = absorb_state(t1, "CCC")
    assert t2.labels == IRC7.labels
    assert t2.entries[2, -1] == pytest.approx(0.0009, abs=1e-15)
    assert t2.entries[5, -1] == pytest.approx(0.1052, abs=1e-15)
    assert_allclose(t2.row_sums, np.delete(t1.row_sums, 6), atol=1e-12)


def test_absorb_zero_column_leaves_rest_unchanged():
    a = np.array([[0.9, 0.0, 0.1], [0.2, 0.7, 0.1], [0, 0, 1.0]])
    a[:, 1] = 0
    a[1] = [0.3, 0.0, 0.7]
    t = TransitionMatrix.from_array(a, ["X", "Y", "D"])
    out = absorb_state(t, "Y")
    assert_array_equal(out.entries, a[np.ix_([0, 2], [0, 2])])


def test_absorb_default_is_invalid():
    t = TransitionMatrix.from_array(np.eye(3), ["X", "Y", "D"])
    with pytest.raises(ValidationError):
        absorb_state(t, "D")
