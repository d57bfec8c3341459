"""Sparse container, matvec kernels, centering, permutations, serialization."""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdakit import io as sio
from sdakit.sparse import (
    LabelError,
    LabelVector,
    SparseFormatError,
    SparseMatrix,
    build_sparse,
    centered_matvec,
    centered_matvec_transpose,
    from_scipy,
    labeled_first_permutation,
    labeled_mean,
    permute_rows,
    permute_symmetric,
)
from conftest import dense_of, labels_first, random_matrix, random_triplets


# A 2x3 matrix small enough to multiply by hand:
#   [[1, 0, 2],
#    [0, 3, 0]]
HAND = build_sparse(2, 3, [0, 0, 1], [0, 2, 1], [1.0, 2.0, 3.0])


# ---------------------------------------------------------------- construction


def test_build_sorts_triplets():
    m = build_sparse(2, 3, [1, 0, 0], [1, 2, 0], [3.0, 2.0, 1.0])
    assert m.row_offsets.tolist() == [0, 2, 3]
    assert m.col_indices.tolist() == [0, 2, 1]
    assert m.values.tolist() == [1.0, 2.0, 3.0]


def test_build_drops_explicit_zeros():
    m = build_sparse(2, 2, [0, 1], [0, 1], [1.0, 0.0])
    assert m.nnz == 1
    assert m.values.tolist() == [1.0]


def test_build_rejects_duplicates():
    with pytest.raises(SparseFormatError, match="duplicate"):
        build_sparse(2, 2, [0, 0], [1, 1], [1.0, 2.0])


def test_build_rejects_out_of_range():
    with pytest.raises(SparseFormatError):
        build_sparse(2, 2, [0], [2], [1.0])
    with pytest.raises(SparseFormatError):
        build_sparse(2, 2, [-1], [0], [1.0])


def test_container_rejects_unsorted_columns():
    with pytest.raises(SparseFormatError):
        SparseMatrix(1, 3, np.array([0, 2]), np.array([2, 0]), np.array([1.0, 1.0]))


def test_container_rejects_nonfinite():
    with pytest.raises(SparseFormatError):
        SparseMatrix(1, 2, np.array([0, 1]), np.array([0]), np.array([np.nan]))


def test_container_rejects_bad_offsets():
    with pytest.raises(SparseFormatError):
        SparseMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 1.0]))


def test_arrays_are_read_only():
    with pytest.raises(ValueError):
        HAND.values[0] = 9.0


def test_from_scipy_canonicalizes():
    sp = pytest.importorskip("scipy.sparse")
    raw = sp.csr_matrix((np.array([1.0, 0.0, 2.0]), (np.array([0, 0, 1]), np.array([1, 0, 0]))), shape=(2, 2))
    m = from_scipy(raw)
    assert m.nnz == 2  # explicit zero dropped
    assert m.col_indices.tolist() == [1, 0]


def test_round_trip_matches_naive_dense_construction(rng):
    rows, cols, values, dense = random_triplets(rng, 50, 40, 0.15)
    m = build_sparse(50, 40, rows, cols, values)
    np.testing.assert_array_equal(dense_of(m), dense)


# -------------------------------------------------------------------- matvecs


def test_zero_matrix_matvec_is_zero():
    z = build_sparse(3, 4, [], [], [])
    np.testing.assert_array_equal(z.matvec(np.ones(4)), np.zeros(3))
    np.testing.assert_array_equal(z.matvec_transpose(np.ones(3)), np.zeros(4))


def test_hand_matvec():
    np.testing.assert_array_equal(HAND.matvec([1.0, 10.0, 100.0]), [201.0, 30.0])


def test_hand_matvec_transpose():
    np.testing.assert_array_equal(HAND.matvec_transpose([2.0, 5.0]), [2.0, 15.0, 4.0])


def test_identity_transpose_is_identity():
    eye = build_sparse(3, 3, [0, 1, 2], [0, 1, 2], [1.0, 1.0, 1.0])
    np.testing.assert_array_equal(eye.matvec_transpose([4.0, 5.0, 6.0]), [4.0, 5.0, 6.0])


def test_one_hot_transpose_extracts_row():
    for i in range(HAND.n_rows):
        e = np.zeros(HAND.n_rows)
        e[i] = 1.0
        np.testing.assert_array_equal(HAND.matvec_transpose(e), dense_of(HAND)[i])


def test_random_matvec_against_dense(rng):
    m, dense = random_matrix(rng, 30, 20)
    for _ in range(5):
        v = rng.standard_normal(20)
        got, want = m.matvec(v), dense @ v
        assert np.linalg.norm(got - want) <= 1e-13 * max(np.linalg.norm(want), 1.0)
        w = rng.standard_normal(30)
        got, want = m.matvec_transpose(w), dense.T @ w
        assert np.linalg.norm(got - want) <= 1e-13 * max(np.linalg.norm(want), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjoint_identity(seed):
    """<Xv, w> == <v, X^T w> for random X, v, w."""
    r = np.random.default_rng(seed)
    m, _ = random_matrix(r, int(r.integers(1, 25)), int(r.integers(1, 25)), 0.3)
    v = r.standard_normal(m.n_cols)
    w = r.standard_normal(m.n_rows)
    left = m.matvec(v) @ w
    right = v @ m.matvec_transpose(w)
    scale = max(abs(left), abs(right), 1.0)
    assert abs(left - right) <= 1e-12 * scale


def test_frobenius_norm(rng):
    m, dense = random_matrix(rng, 12, 9)
    assert m.frobenius_norm() == pytest.approx(np.linalg.norm(dense), rel=1e-14)


def test_row_support_and_nnz():
    assert HAND.row_support(0).tolist() == [0, 2]
    assert HAND.row_nnz().tolist() == [2, 1]


# ------------------------------------------------------------------ centering


def test_single_labeled_row_mean_is_that_row():
    labels = LabelVector([1, 0])
    c = labeled_mean(HAND, labels)
    np.testing.assert_array_equal(c.mu, [1.0, 0.0, 2.0])


def test_hand_mean_of_two_labeled_rows():
    # 5x3 matrix; rows 0 and 1 labeled. Row 0 = [1,0,2], row 1 = [0,4,0],
    # so the labeled mean is [0.5, 2, 1].
    m = build_sparse(5, 3, [0, 0, 1, 2, 3, 4], [0, 2, 1, 0, 1, 2], [1.0, 2.0, 4.0, 7.0, 8.0, 9.0])
    c = labeled_mean(m, labels_first(1, 1, 3))
    np.testing.assert_array_equal(c.mu, [0.5, 2.0, 1.0])
    assert c.n_labeled == 2


def test_labeled_mean_requires_labels():
    with pytest.raises(LabelError):
        labeled_mean(HAND, LabelVector([0, 0]))
    with pytest.raises(LabelError):
        labeled_mean(HAND, LabelVector([1, 0, -1]))


def test_centered_matvec_zero_vector():
    c = labeled_mean(HAND, LabelVector([1, -1]))
    np.testing.assert_array_equal(centered_matvec(HAND, c, np.zeros(3)), np.zeros(2))
    np.testing.assert_array_equal(centered_matvec_transpose(HAND, c, np.zeros(2)), np.zeros(3))


def test_centered_matvec_against_dense(rng):
    m, dense = random_matrix(rng, 25, 15)
    labels = labels_first(4, 3, 18)
    c = labeled_mean(m, labels)
    mu = dense[:7].mean(axis=0)
    centered = dense - np.outer(np.ones(25), mu)
    for _ in range(5):
        v = rng.standard_normal(15)
        assert np.linalg.norm(centered_matvec(m, c, v) - centered @ v) <= 1e-12 * max(
            1.0, np.linalg.norm(centered @ v)
        )
        w = rng.standard_normal(25)
        assert np.linalg.norm(
            centered_matvec_transpose(m, c, w) - centered.T @ w
        ) <= 1e-12 * max(1.0, np.linalg.norm(centered.T @ w))


def test_centering_annihilates_labeled_indicator(rng):
    """(X - 1 mu^T)^T applied to the labeled indicator vanishes."""
    for _ in range(20):
        n, d = int(rng.integers(2, 40)), int(rng.integers(1, 30))
        n_lab = int(rng.integers(1, n + 1))
        m, _ = random_matrix(rng, n, d, 0.3)
        labels = LabelVector([1] * n_lab + [0] * (n - n_lab))
        c = labeled_mean(m, labels)
        ind = labels.mask_labeled.astype(float)
        out = centered_matvec_transpose(m, c, ind)
        assert np.max(np.abs(out)) <= 1e-12 * max(m.frobenius_norm(), 1.0)


# --------------------------------------------------------------------- labels


def test_label_vector_counts():
    lv = LabelVector([1, -1, 0, 1, 0])
    assert (lv.n_class1, lv.n_class2, lv.n_labeled) == (2, 1, 3)
    assert lv.mask_labeled.tolist() == [True, True, False, True, False]


def test_label_vector_rejects_bad_values():
    with pytest.raises(LabelError):
        LabelVector([1, 2, 0])


def test_is_labeled_first():
    assert LabelVector([1, -1, 0, 0]).is_labeled_first
    assert not LabelVector([1, 0, -1, 0]).is_labeled_first
    assert LabelVector([0, 0]).is_labeled_first


def test_labeled_first_permutation_is_stable():
    lv = LabelVector([0, 1, 0, -1, 1])
    perm = labeled_first_permutation(lv)
    assert perm.tolist() == [1, 3, 4, 0, 2]


# --------------------------------------------------------------- permutations


def test_permute_rows_matches_dense(rng):
    m, dense = random_matrix(rng, 10, 6)
    perm = rng.permutation(10)
    np.testing.assert_array_equal(dense_of(permute_rows(m, perm)), dense[perm])


def test_permute_symmetric_matches_dense(rng):
    m, dense = random_matrix(rng, 8, 8)
    perm = rng.permutation(8)
    np.testing.assert_array_equal(
        dense_of(permute_symmetric(m, perm)), dense[np.ix_(perm, perm)]
    )


def test_permute_validates():
    with pytest.raises(ValueError):
        permute_rows(HAND, np.array([0, 0]))
    with pytest.raises(ValueError):
        permute_symmetric(HAND, np.array([0, 1]))


# -------------------------------------------------------------- serialization


def test_text_round_trip_bit_exact(rng):
    m, _ = random_matrix(rng, 50, 40, 0.1)
    path = "/tmp/sdakit-test-roundtrip.smx"
    sio.write_sparse_text(path, m, comments=["provenance k=3"])
    back, comments = sio.read_sparse_text(path)
    assert back == m
    np.testing.assert_array_equal(back.values, m.values)  # bit-exact via %.17g
    assert comments == ["provenance k=3"]


def test_binary_round_trip(tmp_path, rng):
    m, _ = random_matrix(rng, 30, 25, 0.2)
    path = tmp_path / "m.bin"
    sio.write_sparse_binary(path, m)
    assert sio.read_sparse_binary(path) == m


def test_read_sparse_sniffs_format(tmp_path, rng):
    m, _ = random_matrix(rng, 9, 7)
    sio.write_sparse_text(tmp_path / "a.smx", m)
    sio.write_sparse_binary(tmp_path / "a.bin", m)
    assert sio.read_sparse(tmp_path / "a.smx") == m
    assert sio.read_sparse(tmp_path / "a.bin") == m


def test_text_reader_reports_line_numbers(tmp_path):
    bad = tmp_path / "bad.smx"
    bad.write_text("2 2 1\n0 0 1.0\n0 oops 2.0\n")
    with pytest.raises(SparseFormatError, match=r"bad\.smx:3"):
        sio.read_sparse_text(bad)


def test_text_reader_rejects_wrong_counts(tmp_path):
    bad = tmp_path / "bad.smx"
    bad.write_text("2 2 3\n0 0 1.0\n")
    with pytest.raises(SparseFormatError):
        sio.read_sparse_text(bad)


def test_binary_reader_rejects_bad_magic(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(SparseFormatError):
        sio.read_sparse_binary(p)


def test_binary_reader_rejects_truncation(tmp_path, rng):
    m, _ = random_matrix(rng, 10, 10)
    p = tmp_path / "m.bin"
    sio.write_sparse_binary(p, m)
    data = p.read_bytes()
    p.write_bytes(data[:-4])
    with pytest.raises(SparseFormatError):
        sio.read_sparse_binary(p)


def test_labels_round_trip(tmp_path):
    lv = LabelVector([1, -1, 0, 0, 1])
    sio.write_labels(tmp_path / "l.txt", lv)
    assert sio.read_labels(tmp_path / "l.txt") == lv


def test_checksum_is_content_addressed(tmp_path, rng):
    m, _ = random_matrix(rng, 15, 10)
    c1 = sio.matrix_checksum(m)
    sio.write_sparse_binary(tmp_path / "m.bin", m)
    assert sio.matrix_checksum(sio.read_sparse_binary(tmp_path / "m.bin")) == c1
    other = build_sparse(15, 10, [0], [0], [1.0])
    assert sio.matrix_checksum(other) != c1


def test_ratings_round_trip(tmp_path):
    betas = np.array([0.01, 1.0])
    scores = np.array([[0.5, -0.25, 1.5], [2.0, 0.0, 3.0]])  # one row per beta
    sio.write_ratings(tmp_path / "r.bin", betas, scores)
    b2, s2 = sio.read_ratings(tmp_path / "r.bin")
    np.testing.assert_array_equal(b2, betas)
    np.testing.assert_array_equal(s2, scores)


# ---------------------------------------------------------------- performance


def test_matvec_cost_scales_with_nnz():
    """Time per stored entry should be about flat as nnz grows 8x."""
    rng = np.random.default_rng(0)

    def best_time(m, v, reps=5):
        best = np.inf
        for _ in range(reps):
            t0 = time.perf_counter()
            m.matvec(v)
            best = min(best, time.perf_counter() - t0)
        return best

    small, _ = random_matrix(rng, 2000, 400, 0.05)   # ~40k nnz
    big, _ = random_matrix(rng, 16000, 400, 0.05)    # ~320k nnz
    v = rng.standard_normal(400)
    t_small = best_time(small, v) / small.nnz
    t_big = best_time(big, v) / big.nnz
    assert t_big <= 5.0 * t_small
