import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adtriage.cluster import (
    FilterReport,
    filter_corpus,
    kmeans,
    matching_purity,
    project_with_clusters,
    tsne_project,
)
from adtriage.features import FeatureVector

from generators import binary_vector_blobs


def _vec(listing_id, bits):
    bits = tuple(bits)
    return FeatureVector(
        listing_id=listing_id,
        third_person=bits[0],
        first_person_plural=bits[1],
        high_entropy=bits[2],
        ngram_bits=bits[3:9],
        words_of_interest=bits[9],
        country_of_interest=bits[10],
        multiple_victims=bits[11],
        low_weight=bits[12],
        website_link=bits[13],
        spa_reference=bits[14],
    )


def _vectors_from_rows(rows):
    return [_vec(f"v{i}", row) for i, row in enumerate(rows)]


# --- all-zero filter ---------------------------------------------------------


def test_filter_drops_exactly_the_all_zero_rows():
    rows = [
        (0,) * 15,
        (1,) + (0,) * 14,
        (0,) * 15,
        (0,) * 7 + (1,) + (0,) * 7,
    ]
    report = filter_corpus(_vectors_from_rows(rows))
    assert report == FilterReport(input_count=4, kept_ids=("v1", "v3"), dropped_count=2)


def test_filter_empty_input():
    report = filter_corpus([])
    assert report.input_count == 0
    assert report.kept_ids == ()
    assert report.dropped_count == 0


@given(
    st.lists(
        st.tuples(*([st.integers(min_value=0, max_value=1)] * 15)),
        max_size=40,
    )
)
def test_filter_is_a_partition(rows):
    vectors = _vectors_from_rows(rows)
    report = filter_corpus(vectors)
    kept = set(report.kept_ids)
    assert report.input_count == len(vectors)
    assert len(kept) + report.dropped_count == len(vectors)
    for v in vectors:
        assert (v.listing_id in kept) == v.any_set()
    # kept order matches input order
    order = [v.listing_id for v in vectors if v.any_set()]
    assert list(report.kept_ids) == order


# --- k-means -----------------------------------------------------------------


def test_kmeans_inertia_never_increases():
    gen = np.random.default_rng(12)
    points = np.vstack([gen.normal(0, 1, (40, 3)), gen.normal(8, 1, (40, 3))])
    result = kmeans(points, k=2, seed=0)
    hist = result.inertia_history
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))


def test_kmeans_single_cluster_is_the_mean():
    points = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 4.0], [2.0, 4.0]])
    result = kmeans(points, k=1, seed=0)
    assert np.allclose(result.centroids, [[1.0, 2.0]])
    assert np.all(result.assignments == 0)


def test_kmeans_handles_duplicate_points():
    points = np.array([[1.0, 1.0]] * 6 + [[5.0, 5.0]] * 6)
    result = kmeans(points, k=2, seed=3)
    assert len(set(result.assignments[:6])) == 1
    assert len(set(result.assignments[6:])) == 1
    assert result.assignments[0] != result.assignments[-1]
    assert result.inertia_history[-1] == pytest.approx(0.0)


def test_kmeans_k_equals_n():
    points = np.array([[0.0], [10.0], [20.0]])
    result = kmeans(points, k=3, seed=1)
    assert sorted(result.assignments.tolist()) == [0, 1, 2]
    assert result.inertia_history[-1] == pytest.approx(0.0)


def test_kmeans_rejects_bad_k():
    points = np.zeros((3, 2))
    with pytest.raises(ValueError):
        kmeans(points, k=0)
    with pytest.raises(ValueError):
        kmeans(points, k=4)


def test_kmeans_is_deterministic():
    gen = np.random.default_rng(7)
    points = gen.normal(size=(50, 4))
    a = kmeans(points, k=3, seed=11)
    b = kmeans(points, k=3, seed=11)
    assert np.array_equal(a.assignments, b.assignments)
    assert np.array_equal(a.centroids, b.centroids)


def test_kmeans_separates_obvious_blobs():
    gen = np.random.default_rng(4)
    points = np.vstack([gen.normal(0, 0.3, (30, 2)), gen.normal(10, 0.3, (30, 2))])
    labels = np.array([0] * 30 + [1] * 30)
    result = kmeans(points, k=2, seed=0)
    assert matching_purity(result.assignments, labels) == 1.0


# --- purity ------------------------------------------------------------------


def test_matching_purity_takes_best_permutation():
    labels = np.array([0, 0, 1, 1])
    assert matching_purity(np.array([1, 1, 0, 0]), labels) == 1.0
    assert matching_purity(np.array([0, 0, 1, 1]), labels) == 1.0
    assert matching_purity(np.array([0, 1, 0, 1]), labels) == 0.5


def test_matching_purity_accepts_non_integer_label_values():
    labels = np.array(["out", "out", "in", "in"])
    assert matching_purity(np.array([0, 0, 1, 1]), labels) == 1.0


def test_matching_purity_rejects_more_than_two_groups():
    with pytest.raises(ValueError):
        matching_purity(np.array([0, 1, 2]), np.array([0, 1, 2]))


# --- projection --------------------------------------------------------------


def test_tsne_validation_errors():
    with pytest.raises(ValueError):
        tsne_project(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        tsne_project(np.zeros((10, 3)), perplexity=5.0)  # needs perplexity < n/3
    with pytest.raises(ValueError):
        tsne_project(np.random.default_rng(0).normal(size=(5001, 2)))


def test_tsne_two_points_end_up_apart():
    points = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    result = tsne_project(points, perplexity=0.5, iterations=120, seed=0)
    assert result.coords.shape == (2, 2)
    assert np.linalg.norm(result.coords[0] - result.coords[1]) > 0


def test_tsne_kl_divergence_decreases_after_exaggeration():
    gen = np.random.default_rng(8)
    points = np.vstack([gen.normal(0, 0.5, (25, 5)), gen.normal(6, 0.5, (25, 5))])
    result = tsne_project(points, perplexity=10, iterations=400, seed=0)
    checkpoints = dict(result.kl_history)
    # early exaggeration ends by iteration 250 in this configuration
    assert checkpoints[400] < checkpoints[300]
    assert all(np.isfinite(v) for v in checkpoints.values())


def test_tsne_is_deterministic():
    gen = np.random.default_rng(9)
    points = gen.normal(size=(30, 4))
    a = tsne_project(points, perplexity=5, iterations=100, seed=6)
    b = tsne_project(points, perplexity=5, iterations=100, seed=6)
    assert np.array_equal(a.coords, b.coords)


def test_projection_separates_feature_blobs():
    points, membership = binary_vector_blobs(n_filtered=150, n_unfiltered=150, seed=2)
    ids = [f"p{i}" for i in range(len(points))]
    result = project_with_clusters(
        ids, points, membership, perplexity=30, iterations=400, seed=1
    )
    assert result.purity == 1.0
    assert result.coords.shape == (300, 2)
    assert result.ids == tuple(ids)


def test_projection_result_aligns_ids_with_rows():
    points, membership = binary_vector_blobs(n_filtered=20, n_unfiltered=20, seed=5)
    ids = [f"q{i}" for i in range(len(points))]
    result = project_with_clusters(ids, points, membership, perplexity=8, iterations=150, seed=1)
    assert len(result.ids) == result.coords.shape[0] == result.kmeans_assignment.shape[0]
