import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage
from skimage.morphology import thin as reference_thin

from disttopo.config import RunConfig
from disttopo.distance import DistanceMap
from disttopo.fixtures import corridor_grid, random_blob
from disttopo.grid import PixelCoord
from disttopo.pipeline import batch_from_grid
from disttopo.rasterio import read_pbm, write_pbm
from disttopo.skeleton import (
    T_CROSS_LUT, binarize, has_square, ridge_filter, skeletonize, suppress_t_cross,
)
from disttopo.thinning import NEIGHBOR_OFFSETS, SIMPLE_LUT, guo_hall, neighbor_codes, thin

from helpers import brute_force_dm, components


def _window(code: int) -> np.ndarray:
    win = np.zeros((3, 3), bool)
    for bit, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        win[1 + dr, 1 + dc] = bool(code >> bit & 1)
    return win


def _laplacian(values):
    # independent stencil application with replicated borders
    p = np.pad(values, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4 * p[1:-1, 1:-1]


# -- ridge_filter / binarize -------------------------------------------------

def test_constant_map_has_no_ridge():
    assert not ridge_filter(np.full((6, 7), 0.4)).any()


def test_one_dimensional_crease():
    values = np.tile([0.0, 1.0, 2.0, 1.0, 0.0], (4, 1))
    # stencil by hand per column: [0+1-0, 0+2-2, 1+1-4, 2+0-2, 1+0-0]
    assert np.array_equal(ridge_filter(values, scale=1.0), np.tile([1.0, 0, 0, 0, 1.0], (4, 1)))
    assert np.array_equal(ridge_filter(values), np.tile([255.0, 0, 0, 0, 255.0], (4, 1)))


def test_eight_neighbor_stencil():
    values = np.zeros((3, 3))
    values[1, 1] = -1.0
    assert ridge_filter(values, 1.0, stencil=8)[1, 1] == 8.0
    assert ridge_filter(values, 1.0, stencil=4)[1, 1] == 4.0
    with pytest.raises(ValueError):
        ridge_filter(values, 1.0, stencil=6)
    with pytest.raises(ValueError):
        ridge_filter(values, 0.0)


def test_corridor_ridge_peaks_on_equidistant_row():
    walls = [(c, r) for c in range(40) for r in (0, 10)]
    dm = brute_force_dm(walls, (11, 40), (0, 0), 3.0, 11)
    ridge = ridge_filter(dm)
    assert np.allclose(ridge, np.maximum(_laplacian(255 * dm), 0), atol=1e-9, rtol=0)
    assert np.all(ridge.argmax(axis=0) == 5)


def test_binarize_is_strict():
    r = np.array([[0.0, 10.0, np.nextafter(10.0, 11.0), 50.0]])
    assert binarize(r).tolist() == [[False, False, True, True]]
    assert not binarize(np.zeros((3, 3))).any()


@pytest.mark.parametrize("width", [5, 7, 9, 11, 13, 15])
def test_corridor_binary_band_holds_centerline(width):
    grid = corridor_grid(width)
    res = batch_from_grid(grid, RunConfig(sigma=4.0))
    center = 2 + (width - 1) // 2
    band = res.layers.binary
    assert band[center].all()
    lab, n = ndimage.label(band, np.ones((3, 3)))
    assert len(set(lab[center])) == 1


# -- thinning ----------------------------------------------------------------

def test_single_pixel_survives():
    img = np.zeros((5, 5), bool)
    img[2, 2] = True
    assert np.array_equal(thin(img), img)


def test_band_thins_to_middle_row():
    img = np.zeros((9, 24), bool)
    img[2:7, 2:22] = True
    out = thin(img)
    assert np.array_equal(out, reference_thin(img))
    # frozen oracle output: middle row, two pixels short of each end
    expected = np.zeros_like(img)
    expected[4, 4:20] = True
    assert np.array_equal(out, expected)


def test_plus_thins_to_cross():
    img = np.zeros((21, 21), bool)
    img[8:13, 1:20] = True
    img[1:20, 8:13] = True
    out = thin(img)
    assert np.array_equal(out, reference_thin(img))
    expected = np.zeros_like(img)
    expected[10, 3:18] = True
    expected[3:18, 10] = True
    assert np.array_equal(out, expected)
    codes = neighbor_codes(out)
    degree = np.vectorize(lambda c: bin(int(c)).count("1"))(codes) * out
    assert (degree == 1).sum() == 4
    assert ndimage.label(degree >= 3, np.ones((3, 3)))[1] == 1


def test_guo_hall_matches_reference_on_blobs():
    rng = np.random.default_rng(11)
    for _ in range(60):
        img = random_blob(rng, 48)
        assert np.array_equal(guo_hall(img), reference_thin(img))


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.integers(8, 64))
def test_thinning_properties(seed, size):
    img = random_blob(np.random.default_rng(seed), size)
    out = thin(img)
    assert not (out & ~img).any()
    assert components(out) == components(img)
    # endpoints of the input are kept
    ends = img & (np.vectorize(lambda c: bin(int(c)).count("1"))(neighbor_codes(img)) == 1)
    assert not (ends & ~out).any()


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_protected_pixels_never_deleted(seed):
    rng = np.random.default_rng(seed)
    img = random_blob(rng, 40)
    protected = img & (rng.random(img.shape) < 0.05)
    out = thin(img, protected)
    assert not (protected & ~out).any()
    assert not (out & ~(img | protected)).any()


def test_protected_shape_must_match():
    with pytest.raises(ValueError):
        thin(np.ones((4, 4), bool), np.ones((3, 3), bool))


def test_x_core_is_an_irreducible_square():
    # four diagonal branches, one per corner of a 2x2 core: every core pixel
    # carries its own branch, so no pixel is deletable and the block remains
    x = np.zeros((10, 10), bool)
    x[4:6, 4:6] = True
    for k in range(1, 4):
        x[4 - k, 4 - k] = x[4 - k, 5 + k] = x[5 + k, 4 - k] = x[5 + k, 5 + k] = True
    assert np.array_equal(thin(x), x)
    assert np.array_equal(reference_thin(x), x)
    assert has_square(thin(x))


def test_break_squares_removes_junction_block():
    img = np.array([
        [0, 1, 0, 0, 1, 1],
        [1, 0, 1, 1, 1, 0],
        [1, 1, 1, 1, 1, 0],
        [0, 0, 1, 0, 1, 0],
        [0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 1, 1],
    ], bool)
    assert has_square(guo_hall(img))
    out = thin(img)
    # frozen: the block's bottom-left pixel goes, everything else stays
    expected = guo_hall(img)
    expected[2, 2] = False
    assert np.array_equal(out, expected)
    assert components(out) == components(img)


def test_break_squares_on_random_blobs():
    rng = np.random.default_rng(1)
    seen = 0
    for _ in range(120):
        img = random_blob(rng, 64, 12)
        if has_square(guo_hall(img)):
            seen += 1
            out = thin(img)
            assert components(out) == components(img)
            assert not (out & ~img).any()
    assert seen > 0


# -- T crossings -------------------------------------------------------------

def _t_predicate(code: int) -> bool:
    win = _window(code)
    if int(win[0, 1]) + int(win[1, 0]) + int(win[1, 2]) + int(win[2, 1]) != 3:
        return False
    return ndimage.label(win, ndimage.generate_binary_structure(2, 1))[1] == 1


def test_t_rule_exhaustive():
    for code in range(256):
        assert T_CROSS_LUT[code] == _t_predicate(code), code


def test_plain_t_is_kept():
    img = np.zeros((3, 3), bool)
    img[0, 1] = img[2, 1] = img[1, 2] = img[1, 1] = True
    assert np.array_equal(suppress_t_cross(img), img)


def test_t_with_flank_diagonals_is_cleared():
    img = np.zeros((3, 3), bool)
    img[0, 1] = img[2, 1] = img[1, 2] = img[1, 1] = img[0, 2] = img[2, 2] = True
    out = suppress_t_cross(img)
    assert not out[1, 1]
    assert (out ^ img).sum() == 1


def test_straight_line_and_empty_unchanged():
    line = np.zeros((3, 5), bool)
    line[1] = True
    assert np.array_equal(suppress_t_cross(line), line)
    assert not suppress_t_cross(np.zeros((4, 4), bool)).any()


def test_t_suppression_single_pass_sees_earlier_clears():
    # two stacked T centers; clearing the first breaks the second's pattern
    img = np.zeros((4, 3), bool)
    img[:, 1] = True
    img[:, 2] = True
    img[0, 2] = img[3, 2] = False
    img[1, 0] = True
    out = suppress_t_cross(img)
    ref = img.copy()
    for r, c in np.argwhere(img):
        code = 0
        for bit, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
            rr, cc = r + dr, c + dc
            if 0 <= rr < 4 and 0 <= cc < 3 and ref[rr, cc]:
                code |= 1 << bit
        if _t_predicate(code):
            ref[r, c] = False
    assert np.array_equal(out, ref)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_suppression_keeps_thin_subset(seed):
    skel = thin(random_blob(np.random.default_rng(seed), 48))
    out = suppress_t_cross(skel)
    assert not (out & ~skel).any()
    assert has_square(out) <= has_square(skel)
    assert components(out) == components(skel)


# -- whole pipeline ------------------------------------------------------------

@pytest.mark.parametrize("width", [5, 7, 9, 11, 13, 15])
def test_corridor_skeleton_is_centerline(width):
    res = batch_from_grid(corridor_grid(width), RunConfig(sigma=4.0))
    expected = np.zeros_like(res.skeleton)
    expected[2 + (width - 1) // 2, :] = True
    assert np.array_equal(res.skeleton, expected)


def test_skeletonize_layers_and_protected():
    dm = DistanceMap(np.tile([0.0, 0.4, 0.8, 0.4, 0.0], (6, 1)), PixelCoord(0, 0), 1.0)
    layers = skeletonize(dm)
    assert layers.ridge.shape == layers.binary.shape == layers.skeleton.shape == (6, 5)
    protected = np.zeros((6, 5), bool)
    protected[0, 2] = True
    assert skeletonize(dm, protected=protected).skeleton[0, 2]


def test_pbm_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    for shape in ((1, 1), (5, 9), (17, 8), (3, 0)):
        mask = rng.random(shape) < 0.4
        write_pbm(tmp_path / "m.pbm", mask, PixelCoord(-7, 12))
        back, origin = read_pbm(tmp_path / "m.pbm")
        assert np.array_equal(back, mask) and origin == (-7, 12)


def test_simple_lut_matches_connectivity():
    for code in range(256):
        win = _window(code)
        assert SIMPLE_LUT[code] == (ndimage.label(win, np.ones((3, 3)))[1] == 1)
