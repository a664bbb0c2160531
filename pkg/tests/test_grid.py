import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from dynrad.errors import DimensionMismatch, EmptyRoi, ValidationError
from dynrad.grid import (OUTSIDE, RoiMask, SeriesSample, Timepoint, VoxelGrid, extract_slice,
                         largest_roi_slice, quantize)


def _line(values):
    v = np.asarray(values, dtype=float).reshape(1, 1, -1)
    return VoxelGrid(v), RoiMask(np.ones_like(v, dtype=bool))


def _mask_with_counts(counts, m=4, n=4):
    inside = np.zeros((len(counts), m, n), dtype=bool)
    for s, c in enumerate(counts):
        inside[s].ravel()[:c] = True
    return RoiMask(inside)


# -- containers -------------------------------------------------------------

def test_from_flat_maps_dims_to_slice_row_col():
    g = VoxelGrid.from_flat((2, 3, 4), np.arange(24))
    assert g.voxels.shape == (4, 2, 3)
    assert g.dims == (2, 3, 4)
    assert g.voxels[1, 0, 0] == 6


def test_from_flat_rejects_wrong_length():
    with pytest.raises(ValidationError):
        VoxelGrid.from_flat((2, 2, 2), np.arange(7))


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_grid_rejects_non_finite(bad):
    v = np.zeros((1, 2, 2))
    v[0, 0, 0] = bad
    with pytest.raises(ValidationError):
        VoxelGrid(v)


@pytest.mark.parametrize("spacing", [(0, 1, 1), (1, -1, 1), (1, 1)])
def test_grid_rejects_bad_spacing(spacing):
    with pytest.raises(ValidationError):
        VoxelGrid(np.zeros((1, 2, 2)), spacing)


def test_integer_voxels_are_promoted():
    g = VoxelGrid(np.ones((1, 2, 2), dtype=np.int16))
    assert g.voxels.dtype == np.float64


def test_containers_are_read_only():
    g = VoxelGrid(np.zeros((1, 2, 2)))
    with pytest.raises(ValueError):
        g.voxels[0, 0, 0] = 1.0


def test_empty_mask_rejected():
    with pytest.raises(EmptyRoi):
        RoiMask(np.zeros((1, 3, 3), dtype=bool))


# -- quantize ---------------------------------------------------------------

def test_quantize_constant_roi_is_all_ones():
    g, m = _line([5.0] * 6)
    q = quantize(g, m, 8)
    assert np.all(q.codes == 1)


def test_quantize_uniform_spread_is_bijective():
    g, m = _line([0, 1, 2, 3])
    assert quantize(g, m, 4).codes.ravel().tolist() == [1, 2, 3, 4]


def test_quantize_hand_example():
    g, m = _line([0, 0.49, 0.51, 1])
    assert quantize(g, m, 2).codes.ravel().tolist() == [1, 1, 2, 2]


def test_quantize_outside_is_sentinel():
    v = np.arange(9, dtype=float).reshape(1, 3, 3)
    inside = np.zeros_like(v, dtype=bool)
    inside[0, 1, :] = True
    q = quantize(VoxelGrid(v), RoiMask(inside), 4)
    assert np.all(q.codes[~inside] == OUTSIDE)
    assert q.min_intensity == 3 and q.max_intensity == 5


def test_quantize_errors():
    g, m = _line([0, 1])
    with pytest.raises(ValidationError):
        quantize(g, m, 1)
    with pytest.raises(DimensionMismatch):
        quantize(g, RoiMask(np.ones((1, 1, 3), dtype=bool)), 4)


grids = hnp.arrays(np.float64, hnp.array_shapes(min_dims=3, max_dims=3, max_side=5),
                   elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False))


int_grids = hnp.arrays(np.float64, hnp.array_shapes(min_dims=3, max_dims=3, max_side=5),
                       elements=st.integers(-1000, 1000).map(float))


# integer intensities, power-of-two gains and integer offsets keep a*v + b
# exact, so the comparison is not clouded by rounding at bin edges
@settings(max_examples=200, deadline=None)
@given(int_grids, st.integers(-6, 6), st.integers(-1000, 1000), st.integers(2, 64))
def test_quantize_affine_invariance(v, log_a, b, levels):
    mask = RoiMask(np.ones(v.shape, dtype=bool))
    base = quantize(VoxelGrid(v), mask, levels).codes
    moved = quantize(VoxelGrid(2.0 ** log_a * v + b), mask, levels).codes
    assert np.array_equal(base, moved)


@settings(max_examples=200, deadline=None)
@given(grids, st.integers(2, 64))
def test_quantize_codes_in_range_and_monotone(v, levels):
    q = quantize(VoxelGrid(v), RoiMask(np.ones(v.shape, dtype=bool)), levels)
    assert q.codes.min() >= 1 and q.codes.max() <= levels
    order = np.argsort(v.ravel(), kind="stable")
    assert np.all(np.diff(q.codes.ravel()[order]) >= 0)


# -- slices -----------------------------------------------------------------

def test_largest_roi_slice_examples():
    assert largest_roi_slice(_mask_with_counts([0, 5, 9, 9, 1])) == 2
    assert largest_roi_slice(_mask_with_counts([0, 0, 3, 0])) == 2
    assert largest_roi_slice(_mask_with_counts([4, 4, 4])) == 0


def test_extract_slice_identity_for_single_slice():
    v = np.random.default_rng(0).normal(size=(1, 3, 3))
    g, m = VoxelGrid(v), RoiMask(np.ones_like(v, dtype=bool))
    g2, m2 = extract_slice(g, m, 0)
    assert np.array_equal(g2.voxels, g.voxels) and np.array_equal(m2.inside, m.inside)


def test_extract_slice_subsets_mask():
    mask = _mask_with_counts([0, 0, 6, 6])
    g = VoxelGrid(np.zeros(mask.inside.shape))
    g2, m2 = extract_slice(g, mask, 2)
    assert m2.count == 6 and g2.dims[2] == 1


def test_extract_slice_errors():
    mask = _mask_with_counts([0, 3])
    g = VoxelGrid(np.zeros(mask.inside.shape))
    with pytest.raises(EmptyRoi):
        extract_slice(g, mask, 0)
    with pytest.raises(IndexError):
        extract_slice(g, mask, 2)


def test_slice_then_quantize_matches_quantize_then_slice():
    # slice 1 holds both the volume min and max, so the clamp ranges agree
    v = np.full((3, 3, 3), 5.0)
    v[1, 0, 0], v[1, 2, 2] = 0.0, 10.0
    v[1, 1, :] = [2.0, 7.0, 9.0]
    mask = RoiMask(np.ones(v.shape, dtype=bool))
    whole = quantize(VoxelGrid(v), mask, 8).codes[1]
    g1, m1 = extract_slice(VoxelGrid(v), mask, 1)
    assert np.array_equal(quantize(g1, m1, 8).codes[0], whole)


# -- series -----------------------------------------------------------------

def _tp(t, shape=(1, 2, 2), spacing=(1.0, 1.0, 1.0)):
    return Timepoint(t, VoxelGrid(np.zeros(shape), spacing), RoiMask(np.ones(shape, dtype=bool)))


def test_series_sample_valid():
    s = SeriesSample("a", (_tp(1.0), _tp(2.5)), 1)
    assert s.k == 2 and s.times.tolist() == [1.0, 2.5]


@pytest.mark.parametrize("times", [(2.0, 1.0), (1.0, 1.0)])
def test_series_rejects_non_monotone_times(times):
    with pytest.raises(ValidationError):
        SeriesSample("a", tuple(_tp(t) for t in times), 0)


def test_series_rejects_mismatched_geometry():
    with pytest.raises(DimensionMismatch):
        SeriesSample("a", (_tp(1.0), _tp(2.0, shape=(1, 3, 2))), 0)
    with pytest.raises(DimensionMismatch):
        SeriesSample("a", (_tp(1.0), _tp(2.0, spacing=(2.0, 1.0, 1.0))), 0)


def test_series_rejects_single_timepoint_and_bad_label():
    with pytest.raises(ValidationError):
        SeriesSample("a", (_tp(1.0),), 0)
    with pytest.raises(ValidationError):
        SeriesSample("a", (_tp(1.0), _tp(2.0)), 2)
