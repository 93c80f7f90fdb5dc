import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from disttopo.config import RunConfig, UpdateSchedule
from disttopo.distance import GaussianKernel, Rect, build_distance_map, reframe
from disttopo.engine import (
    IncrementalEngine, changed_outside, graph_changes_outside, load_checkpoint, update_graph,
)
from disttopo.fixtures import corridor_grid, random_blob
from disttopo.graph import canonical_form, skeleton_graph
from disttopo.grid import Pose2D, ScanFrame, scan_to_obstacles
from disttopo.pipeline import batch_from_obstacles, skeleton_from_dm
from disttopo.thinning import thin

from conftest import HOUSE_CONFIG
from helpers import components

CFG = RunConfig(sigma=4.0, resolution=1.0)


def _empty_frame(fid: int) -> ScanFrame:
    return ScanFrame(fid, Pose2D(0, 0), 0.0, 0.1, 5.0, (float("inf"),) * 4)


def _corridor_walls(col0: int, col1: int, width: int = 9, wall_rows=(0, 1)) -> np.ndarray:
    top = [(c, r) for c in range(col0, col1) for r in wall_rows]
    low = [(c, r + len(wall_rows) + width) for c in range(col0, col1) for r in range(len(wall_rows))]
    return np.array(top + low, dtype=np.int64)


def _on_canvas(values: np.ndarray, canvas: Rect, target: Rect) -> np.ndarray:
    return reframe(values, canvas, target, False)


# -- schedule and ingest -------------------------------------------------------

def test_schedule_validation():
    assert str(UpdateSchedule()) == "1,20,80"
    assert UpdateSchedule.parse("2, 4,8") == UpdateSchedule(2, 4, 8)
    for bad in ((0, 20, 80), (3, 20, 80), (1, 20, 70)):
        with pytest.raises(ValueError):
            UpdateSchedule(*bad)
    with pytest.raises(ValueError):
        UpdateSchedule.parse("1,2")


def test_zero_return_frame_only_counts():
    eng = IncrementalEngine(CFG)
    eng.ingest_pixels(_corridor_walls(0, 20))
    dm = eng.global_dm.values.copy()
    dirty = eng.dm_dirty.copy()
    eng.ingest(_empty_frame(5))
    assert eng.frame_count == 2
    assert np.array_equal(eng.global_dm.values, dm) and np.array_equal(eng.dm_dirty, dirty)


def test_frame_ids_must_increase():
    eng = IncrementalEngine(CFG)
    eng.ingest(_empty_frame(3))
    with pytest.raises(ValueError):
        eng.ingest(_empty_frame(3))


def test_reingest_identical_frame_is_idempotent(house_frames):
    eng = IncrementalEngine(HOUSE_CONFIG.replace(schedule=UpdateSchedule(1, 1000, 1000)))
    eng.ingest(house_frames[0])
    dm = eng.global_dm.values.copy()
    eng.dm_dirty[:] = False
    again = house_frames[0]
    eng.ingest(ScanFrame(1, again.pose, again.angle_min, again.angle_increment, again.range_max, again.ranges))
    assert np.array_equal(eng.global_dm.values, dm) and not eng.dm_dirty.any()


def test_replay_distance_map_equals_union_rebuild(house_engine, house_frames):
    cfg = HOUSE_CONFIG
    union = np.unique(np.concatenate([scan_to_obstacles(f, cfg.resolution, cfg.origin) for f in house_frames]), axis=0)
    dm = house_engine.global_dm
    batch = build_distance_map(union, dm.bounds, GaussianKernel(cfg.sigma))
    assert np.abs(dm.values - batch.values).max() == 0.0
    got = house_engine.distance.obstacle_pixels()
    assert {tuple(p) for p in got} == {tuple(p) for p in union}


@pytest.mark.parametrize("schedule", ["1,1,1", "2,20,80", "1,500,1000", "5,5,5"])
def test_distance_map_schedule_independent(house_frames, schedule):
    frames = house_frames[:300]
    ref = IncrementalEngine(HOUSE_CONFIG)
    other = IncrementalEngine(HOUSE_CONFIG.replace(schedule=UpdateSchedule.parse(schedule)))
    for eng in (ref, other):
        for f in frames:
            eng.ingest(f)
        eng.finish()
    assert ref.global_dm.bounds == other.global_dm.bounds
    assert np.array_equal(ref.global_dm.values, other.global_dm.values)


# -- skeleton loop ---------------------------------------------------------------

def test_empty_updates_are_noops():
    eng = IncrementalEngine(CFG)
    eng.ingest_pixels(_corridor_walls(0, 30))
    eng.update_skeleton()
    eng.update_graph()
    skel, graph = eng.global_skeleton.copy(), eng.global_graph.to_json()
    eng.update_skeleton()
    eng.update_graph()
    assert np.array_equal(eng.global_skeleton, skel) and eng.global_graph.to_json() == graph
    assert eng.skeleton_reports[-1].updated_pixels == 0


def test_first_update_equals_batch():
    walls = _corridor_walls(0, 40)
    eng = IncrementalEngine(CFG)
    eng.ingest_pixels(walls)
    eng.update_skeleton()
    batch = batch_from_obstacles(walls, eng.global_dm.bounds, CFG)
    assert np.array_equal(_on_canvas(eng.global_skeleton, eng.skeleton_canvas, eng.global_dm.bounds), batch.skeleton)
    eng.update_graph()
    assert canonical_form(eng.global_graph) == canonical_form(batch.graph)


def test_corridor_extension_keeps_old_pixels_and_stays_connected():
    eng = IncrementalEngine(CFG)
    eng.ingest_pixels(_corridor_walls(0, 40))
    eng.update_skeleton()
    before, before_canvas = eng.global_skeleton.copy(), eng.skeleton_canvas
    eng.ingest_pixels(_corridor_walls(40, 80))
    job_dirty, job_canvas = eng.dm_dirty.copy(), eng.global_dm.bounds
    eng.update_skeleton()
    zone = eng.skeleton_loop.update_zone(job_dirty)
    assert changed_outside(before, before_canvas, eng.global_skeleton, eng.skeleton_canvas, zone, job_canvas) == 0

    canvas = eng.global_dm.bounds
    skel = _on_canvas(eng.global_skeleton, eng.skeleton_canvas, canvas)
    batch = batch_from_obstacles(_corridor_walls(0, 80), canvas, CFG).skeleton
    # centerline row: walls at rows 0-1 and 11-12, free rows 2..10
    assert components(skel) == 1
    center = 6 - canvas.row0
    inner = slice(2 - canvas.col0 + 2, 78 - canvas.col0 - 2)
    assert skel[center, inner].all()
    # agreement with batch everywhere except a 2-px band at the zone border
    zone_c = _on_canvas(zone, job_canvas, canvas)
    edge = ndimage.binary_dilation(zone_c, iterations=2) & ndimage.binary_dilation(~zone_c, iterations=2)
    assert ((skel != batch) & ~edge).sum() == 0


# -- graph update ----------------------------------------------------------------

def _corridor_skeleton(length=60, width=9):
    res = batch_from_obstacles(_corridor_walls(0, length, width), Rect(0, 0, length, width + 4), CFG)
    return res.skeleton, res.graph, Rect(0, 0, length, width + 4)


def test_update_graph_empty_mask_is_noop():
    skel, graph, region = _corridor_skeleton()
    g = graph.copy()
    report = update_graph(g, skel, np.zeros_like(skel), region)
    assert g.to_json() == graph.to_json() and report.local_vertices == 0


def test_update_graph_full_mask_equals_batch():
    skel, graph, region = _corridor_skeleton()
    g = graph.copy()
    # start from a stale graph with an extra vertex somewhere inside the mask
    g.add_vertex((30, 0))
    update_graph(g, skel, np.ones_like(skel), region)
    assert canonical_form(g) == canonical_form(skeleton_graph(skel))


def test_half_masked_corridor_has_no_seam_vertices():
    skel, graph, region = _corridor_skeleton()
    mask = np.zeros_like(skel)
    mask[:, 30:] = True
    g = graph.copy()
    report = update_graph(g, skel, mask, region)
    assert canonical_form(g) == canonical_form(graph)
    assert len(g.vertices) == 2 and len(g.edges) == 1 and not report.dangling
    assert all(g.degree(v) == 1 for v in g.vertices)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.integers(0, 47), st.integers(0, 47), st.integers(1, 48), st.integers(1, 48))
def test_unchanged_skeleton_with_random_mask_gives_batch_graph(seed, r0, c0, h, w):
    skel = thin(random_blob(np.random.default_rng(seed), 48))
    graph = skeleton_graph(skel)
    mask = np.zeros_like(skel)
    mask[r0:r0 + h, c0:c0 + w] = True
    g = graph.copy()
    report = update_graph(g, skel, mask, Rect(0, 0, 48, 48))
    assert canonical_form(g) == canonical_form(graph), report
    # a reported dangling end can only be a true skeleton endpoint on the mask border
    ends = {tuple(v.pos) for v in graph.vertices.values() if graph.degree(v.id) <= 1}
    assert {tuple(p) for p in report.dangling} <= ends


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_random_mask_blob_gives_batch_graph(seed, mseed):
    skel = thin(random_blob(np.random.default_rng(seed), 48))
    mask = random_blob(np.random.default_rng(mseed), 48, n_disks=3)
    graph = skeleton_graph(skel)
    g = graph.copy()
    update_graph(g, skel, mask, Rect(0, 0, 48, 48))
    assert canonical_form(g) == canonical_form(graph)


def test_graph_update_outside_mask_is_stable():
    skel, graph, region = _corridor_skeleton(80)
    changed = skel.copy()
    changed[6, 60:] = False  # the right end retreats
    mask = np.zeros_like(skel)
    mask[:, 55:] = True
    g = graph.copy()
    update_graph(g, changed, mask, region)
    assert graph_changes_outside(graph, g, mask, region) == []
    assert canonical_form(g) == canonical_form(skeleton_graph(changed))


# -- whole engine ----------------------------------------------------------------

def _replay(frames, cfg, pipelined=False, hooks=()):
    with IncrementalEngine(cfg, pipelined=pipelined) as eng:
        eng.hooks.extend(hooks)
        for f in frames:
            eng.ingest(f)
        eng.finish()
    return eng


def test_stability_hooks_on_house_prefix(house_frames):
    problems = []

    def check(eng, loop, before, job):
        if loop == "skeleton":
            canvas, skel = before
            zone = eng.skeleton_loop.update_zone(job.dirty)
            n = changed_outside(skel, canvas, eng.global_skeleton, eng.skeleton_canvas, zone, job.canvas)
            if n:
                problems.append(f"skeleton: {n} px")
        else:
            problems.extend(graph_changes_outside(before, eng.global_graph, job.mask, job.canvas))

    eng = _replay(house_frames[:400], HOUSE_CONFIG, hooks=[check])
    assert len(eng.skeleton_reports) >= 20 and len(eng.graph_reports) >= 5
    assert problems == []


def test_pipelined_matches_reference(house_frames):
    frames = house_frames[:400]
    a = _replay(frames, HOUSE_CONFIG)
    b = _replay(frames, HOUSE_CONFIG, pipelined=True)
    assert np.array_equal(a.global_dm.values, b.global_dm.values)
    assert a.skeleton_canvas == b.skeleton_canvas and np.array_equal(a.global_skeleton, b.global_skeleton)
    assert a.global_graph.to_json() == b.global_graph.to_json()


def test_incremental_graph_close_to_batch(house_engine):
    batch = skeleton_from_dm(house_engine.global_dm, HOUSE_CONFIG)
    canvas = house_engine.global_dm.bounds
    inc = _on_canvas(house_engine.global_skeleton, house_engine.skeleton_canvas, canvas)
    # the seams leave few differing pixels
    assert (inc != batch.skeleton).sum() <= 0.05 * batch.skeleton.sum()


def test_checkpoint_round_trip(tmp_path, house_engine):
    out = house_engine.save_checkpoint(tmp_path / "ck")
    ck = load_checkpoint(out)
    assert ck.manifest["frame_count"] == house_engine.frame_count
    assert ck.manifest["schedule"] == "1,20,80" and ck.manifest["sigma"] == 8.0
    assert np.array_equal(ck.distance.values, house_engine.global_dm.values.astype(np.float32))
    assert ck.distance.origin == house_engine.global_dm.origin
    assert np.array_equal(ck.skeleton, house_engine.global_skeleton)
    assert tuple(ck.skeleton_origin) == (house_engine.skeleton_canvas.col0, house_engine.skeleton_canvas.row0)
    assert np.array_equal(ck.obstacles, house_engine.distance.obstacles)
    assert ck.graph.to_json() == house_engine.global_graph.to_json()
    assert not ck.dm_dirty.any() and not ck.sk_dirty.any()


def test_timing_stats_shape(house_engine):
    stats = house_engine.timing_stats()
    assert set(stats) == {"distmap", "skeleton", "graph"}
    assert stats["distmap"]["count"] == house_engine.frame_count
    s = stats["skeleton"]
    assert s["min_ms"] <= s["mean_ms"] <= s["max_ms"]
