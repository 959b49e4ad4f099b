import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatialgrammar.compiler import (
    CompiledScene,
    Placement,
    Provenance,
    compile_building,
    compile_scene,
)
from spatialgrammar.geometry import GridSpec, OrientedBox, Vec3
from spatialgrammar.llmsli import parse_llmsli
from spatialgrammar.llmslb import parse_llmslb
from spatialgrammar.validator import (
    ValidationReport,
    ValidatorConfig,
    check_bounds,
    check_collisions,
    check_support,
    collision_rate,
    obb_intersect,
    report_text,
    validate,
)
from spatialgrammar.vocab import Category


# ---------------------------------------------------------------------------
# an independent SAT written over corner projections with numpy


def corners_2d(box: OrientedBox) -> np.ndarray:
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    r = np.array([[c, -s], [s, c]])
    half = np.array([box.size.x / 2.0, box.size.y / 2.0])
    offsets = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]) * half
    return np.array([box.center.x, box.center.y]) + offsets @ r.T


def sat_margin(a: OrientedBox, b: OrientedBox) -> float:
    """Min interval overlap over the z axis and both boxes' in-plane normals.

    Positive means the boxes interpenetrate by that depth, negative means some
    axis separates them.
    """
    z = min(a.center.z + a.size.z / 2, b.center.z + b.size.z / 2) - max(
        a.center.z - a.size.z / 2, b.center.z - b.size.z / 2
    )
    margins = [z]
    ca, cb = corners_2d(a), corners_2d(b)
    for yaw in (a.yaw, b.yaw):
        c, s = math.cos(yaw), math.sin(yaw)
        for axis in (np.array([c, s]), np.array([-s, c])):
            pa, pb = ca @ axis, cb @ axis
            margins.append(min(pa.max(), pb.max()) - max(pa.min(), pb.min()))
    return min(margins)


def point_in_box_2d(px: float, py: float, box: OrientedBox) -> bool:
    dx, dy = px - box.center.x, py - box.center.y
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    return abs(u) <= box.size.x / 2.0 and abs(v) <= box.size.y / 2.0


def random_box(rng: random.Random, span: float = 2.0) -> OrientedBox:
    q = lambda v: round(v * 20) / 20.0  # keep coordinates off the eps knife edge
    return OrientedBox(
        center=Vec3(
            q(rng.uniform(-span, span)), q(rng.uniform(-span, span)), q(rng.uniform(0.2, 1.5))
        ),
        size=Vec3(q(rng.uniform(0.3, 2.0)), q(rng.uniform(0.3, 2.0)), q(rng.uniform(0.3, 1.0))),
        yaw=math.radians(rng.choice(range(0, 360, 15))),
    )


class TestObbIntersect:
    def test_separated(self):
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        b = OrientedBox(Vec3(3, 0, 0.5), Vec3(1, 1, 1), 0.0)
        assert obb_intersect(a, b) is None

    def test_exact_touch_is_clear(self):
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        b = OrientedBox(Vec3(1.0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        assert obb_intersect(a, b) is None

    def test_penetration_depth(self):
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        b = OrientedBox(Vec3(0.5, 0, 0.5), Vec3(1, 1, 1), 0.0)
        assert obb_intersect(a, b) == pytest.approx(0.5)

    def test_z_separation(self):
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        b = OrientedBox(Vec3(0, 0, 2.0), Vec3(1, 1, 1), 0.0)
        assert obb_intersect(a, b) is None

    def test_stacked_touching_in_z(self):
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        b = OrientedBox(Vec3(0, 0, 1.5), Vec3(1, 1, 1), 0.0)
        assert obb_intersect(a, b) is None

    def test_rotated_corner_cases(self):
        # a 45-degree square pokes its corner into an axis-aligned one
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        close = OrientedBox(Vec3(1.2, 0, 0.5), Vec3(1, 1, 1), math.pi / 4)
        far = OrientedBox(Vec3(1.21, 0, 0.5), Vec3(1, 1, 1), math.pi / 4)
        assert obb_intersect(a, close) is not None
        assert obb_intersect(a, far) is None

    def test_symmetry(self, rng):
        for _ in range(100):
            a, b = random_box(rng), random_box(rng)
            assert obb_intersect(a, b) == obb_intersect(b, a)

    def test_matches_corner_projection_sat(self, rng):
        hits = 0
        for _ in range(500):
            a, b = random_box(rng), random_box(rng)
            margin = sat_margin(a, b)
            depth = obb_intersect(a, b)
            if margin > 1e-6:
                hits += 1
                assert depth == pytest.approx(margin, abs=1e-9)
            elif margin < 1e-6 - 1e-9:
                assert depth is None
        assert hits > 30  # the sample actually exercised overlapping pairs

    def test_monte_carlo_agreement(self, rng):
        """Sampled points in the footprint AABB intersection must land inside
        both boxes exactly when the exact test reports an overlap."""
        checked = 0
        for trial in range(300):
            a, b = random_box(rng), random_box(rng)
            margin = sat_margin(a, b)
            if abs(margin) <= 1e-3:
                continue  # too close to call for a sampler
            z_overlap = min(a.center.z + a.size.z / 2, b.center.z + b.size.z / 2) - max(
                a.center.z - a.size.z / 2, b.center.z - b.size.z / 2
            )
            ca, cb = corners_2d(a), corners_2d(b)
            lo = np.maximum(ca.min(axis=0), cb.min(axis=0))
            hi = np.minimum(ca.max(axis=0), cb.max(axis=0))
            if (hi <= lo).any() or z_overlap <= 0:
                assert obb_intersect(a, b) is None
                checked += 1
                continue
            pts = np.column_stack(
                [
                    np.array([rng.uniform(lo[0], hi[0]) for _ in range(4000)]),
                    np.array([rng.uniform(lo[1], hi[1]) for _ in range(4000)]),
                ]
            )
            hit = any(
                point_in_box_2d(px, py, a) and point_in_box_2d(px, py, b) for px, py in pts
            )
            exact = obb_intersect(a, b) is not None
            if hit:
                assert exact  # a common point is a proof of overlap
            elif margin > 0.05 and z_overlap > 1e-3:
                # comfortably overlapping: the sampler must find a witness
                assert hit, (a, b)
            if not exact:
                assert not hit
            checked += 1
        assert checked > 100

    @given(
        dx=st.floats(-3, 3),
        dy=st.floats(-3, 3),
        rot=st.floats(0, 2 * math.pi),
    )
    @settings(max_examples=200, deadline=None)
    def test_rigid_motion_invariance(self, dx, dy, rot):
        a = OrientedBox(Vec3(0.3, -0.2, 0.5), Vec3(1.2, 0.7, 1.0), 0.4)
        b = OrientedBox(Vec3(0.9, 0.4, 0.6), Vec3(0.8, 1.1, 0.9), 1.9)

        def moved(box: OrientedBox) -> OrientedBox:
            c, s = math.cos(rot), math.sin(rot)
            x = box.center.x * c - box.center.y * s + dx
            y = box.center.x * s + box.center.y * c + dy
            return OrientedBox(Vec3(x, y, box.center.z), box.size, box.yaw + rot)

        before = obb_intersect(a, b)
        after = obb_intersect(moved(a), moved(b))
        if before is None:
            assert after is None
        else:
            assert after == pytest.approx(before, abs=1e-9)


def scene_of_boxes(boxes, grid=GridSpec(1.0, 6, 6)) -> CompiledScene:
    placements = tuple(
        Placement(
            id=f"box_{k}",
            identifier="box",
            category=Category.FLOOR_FURNITURE,
            box=box,
            parent=None,
            depth=0,
            source=Provenance("main", k, 0, 0),
        )
        for k, box in enumerate(boxes)
    )
    return CompiledScene(grid=grid, placements=placements)


class TestCheckCollisions:
    def test_brute_force_parity(self, rng):
        for _ in range(30):
            boxes = [random_box(rng, span=1.5) for _ in range(8)]
            scene = scene_of_boxes(boxes)
            got = {(c.a_id, c.b_id) for c in check_collisions(scene)}
            want = set()
            for i, j in itertools.combinations(range(len(boxes)), 2):
                if sat_margin(boxes[i], boxes[j]) > 1e-6:
                    want.add((f"box_{i}", f"box_{j}"))
            assert got == want

    def test_message_wording(self, vocab):
        src = (
            "llmsli grid=1m dims=4x4\nmain:\n"
            "0 0 0 0\n"
            "0 sofa 0 0\n"
            "0 coffee_table 0 0\n"
            "0 0 0 0\n"
        )
        scene = compile_scene(parse_llmsli(src), vocab)
        diags = check_collisions(scene)
        assert len(diags) == 1
        assert diags[0].message == "Coffee table overlaps with sofa at position (1,1)"
        assert diags[0].a_id == "coffee_table_0"
        assert diags[0].b_id == "sofa_0"
        assert diags[0].b_cell == (1, 1)

    def test_child_never_collides_with_ancestors(self, vocab):
        src = (
            "llmsli grid=1m dims=1x1\nmain:\ntv_stand(A_on_top)\n"
            "sublayout A dims=1x1:\ntv\n"
        )
        scene = compile_scene(parse_llmsli(src), vocab)
        assert check_collisions(scene) == []

    def test_siblings_do_collide(self, vocab):
        # two items share the single slot column on a narrow top
        src = (
            "llmsli grid=1m dims=1x1\nmain:\ndesk[1.2x0.6x0.7](A_on_top)(B_on_top)\n"
            "sublayout A dims=1x1:\nmonitor[0.5x0.2x0.4]\n"
            "sublayout B dims=1x1:\nlaptop[0.4x0.3x0.05]\n"
        )
        with pytest.raises(Exception):
            compile_scene(parse_llmsli(src), vocab)

    def test_wall_joints_not_reported(self, vocab):
        ring = (
            "llmslb grid=1m dims=4x4\nmain:\n"
            "w w w w\nw 0 0 w\nw 0 0 w\nw w w w\n"
        )
        scene = compile_building(parse_llmslb(ring), vocab)
        assert check_collisions(scene) == []

    def test_furniture_hits_wall(self, vocab):
        wall = Placement(
            id="wall_0",
            identifier="wall",
            category=Category.STRUCTURAL,
            box=OrientedBox(Vec3(0, 0, 1.3), Vec3(4.0, 0.2, 2.6), 0.0),
            parent=None,
            depth=0,
            source=Provenance("structural", 0, 0, 0),
        )
        sofa = Placement(
            id="sofa_0",
            identifier="sofa",
            category=Category.FLOOR_FURNITURE,
            box=OrientedBox(Vec3(0, 0.05, 0.4), Vec3(1.9, 0.9, 0.8), 0.0),
            parent=None,
            depth=0,
            source=Provenance("main", 0, 0, 0),
        )
        scene = CompiledScene(
            grid=GridSpec(1.0, 4, 4), placements=(sofa,), structural=(wall,)
        )
        diags = check_collisions(scene)
        assert [(d.a_id, d.b_id) for d in diags] == [("sofa_0", "wall_0")]

    def test_pure(self, vocab):
        src = "llmsli grid=1m dims=4x4\nmain:\n0 0 0 0\n0 sofa 0 0\n0 coffee_table 0 0\n0 0 0 0\n"
        scene = compile_scene(parse_llmsli(src), vocab)
        first = check_collisions(scene)
        second = check_collisions(scene)
        assert first == second


class TestCollisionRate:
    def test_two_of_three(self, vocab):
        src = (
            "llmsli grid=1m dims=4x4\nmain:\n"
            "0 0 0 sofa@90\n"
            "0 sofa 0 0\n"
            "0 coffee_table 0 0\n"
            "0 0 0 0\n"
        )
        scene = compile_scene(parse_llmsli(src), vocab)
        assert collision_rate(scene) == 66.7

    def test_clean_scene(self, vocab):
        scene = compile_scene(
            parse_llmsli("llmsli grid=1m dims=2x2\nmain:\nsofa 0\n0 0\n"), vocab
        )
        assert collision_rate(scene) == 0.0

    def test_empty_scene(self):
        assert collision_rate(scene_of_boxes([])) == 0.0

    def test_two_of_ten(self):
        boxes = [
            OrientedBox(Vec3(3 * k, 0, 0.5), Vec3(1, 1, 1), 0.0) for k in range(8)
        ]
        boxes.append(OrientedBox(Vec3(30, 0, 0.5), Vec3(1, 1, 1), 0.0))
        boxes.append(OrientedBox(Vec3(30.5, 0, 0.5), Vec3(1, 1, 1), 0.0))
        scene = scene_of_boxes(boxes, grid=GridSpec(1.0, 40, 40))
        assert collision_rate(scene) == 20.0


class TestCheckSupport:
    def test_floating_root(self):
        box = OrientedBox(Vec3(0, 0, 1.0), Vec3(1, 1, 0.8), 0.0)
        scene = scene_of_boxes([box])
        diags = check_support(scene)
        assert len(diags) == 1
        assert diags[0].gap_m == pytest.approx(0.6)
        assert "box_0" in diags[0].message

    def test_sunken_root(self):
        box = OrientedBox(Vec3(0, 0, 0.1), Vec3(1, 1, 0.8), 0.0)
        diags = check_support(scene_of_boxes([box]))
        assert diags[0].gap_m == pytest.approx(-0.3)

    def test_compiled_scenes_always_supported(self, vocab):
        src = (
            "llmsli grid=1m dims=2x2\nmain:\nsofa pendant_light\n0 tv_stand(A_on_top)\n"
            "sublayout A dims=1x1:\ntv\n"
        )
        scene = compile_scene(parse_llmsli(src), vocab)
        assert check_support(scene) == []

    def test_hovering_child(self):
        parent = Placement(
            id="table_0",
            identifier="table",
            category=Category.FLOOR_FURNITURE,
            box=OrientedBox(Vec3(0, 0, 0.35), Vec3(1, 1, 0.7), 0.0),
            parent=None,
            depth=0,
            source=Provenance("main", 0, 0, 0),
        )
        from spatialgrammar.llmsli import Face

        child = Placement(
            id="vase_0",
            identifier="vase",
            category=Category.SURFACE_ITEM,
            box=OrientedBox(Vec3(0, 0, 1.0), Vec3(0.1, 0.1, 0.3), 0.0),
            parent="table_0",
            depth=1,
            source=Provenance("A", 0, 0, 1, Face.TOP),
        )
        scene = CompiledScene(grid=GridSpec(1.0, 2, 2), placements=(parent, child))
        diags = check_support(scene)
        assert len(diags) == 1
        assert diags[0].id == "vase_0"
        assert diags[0].parent == "table_0"
        assert diags[0].gap_m == pytest.approx(0.15)


class TestCheckBounds:
    def test_default_envelope(self):
        inside = OrientedBox(Vec3(0.5, 0.5, 0.5), Vec3(1, 1, 1), 0.0)
        assert check_bounds(scene_of_boxes([inside], GridSpec(1.0, 2, 2))) == []
        poking = OrientedBox(Vec3(1.2, 0.5, 0.5), Vec3(1, 1, 1), 0.0)
        diags = check_bounds(scene_of_boxes([poking], GridSpec(1.0, 2, 2)))
        assert len(diags) == 1
        assert diags[0].id == "box_0"

    def test_rotation_can_violate(self):
        # inside the 2x2 floor at yaw 0, the 45-degree diagonal pokes out
        straight = OrientedBox(Vec3(0.5, 0.5, 0.5), Vec3(1.5, 1.5, 1), 0.0)
        tilted = OrientedBox(Vec3(0.5, 0.5, 0.5), Vec3(1.5, 1.5, 1), math.pi / 4)
        grid = GridSpec(1.0, 2, 2)
        assert check_bounds(scene_of_boxes([straight], grid)) == []
        diags = check_bounds(scene_of_boxes([tilted], grid))
        assert len(diags) == 1
        cx, cy = diags[0].corner
        assert max(abs(cx - 0.5), abs(cy - 0.5)) == pytest.approx(1.5 * math.sqrt(2) / 2)

    def test_boundary_corner_allowed(self):
        box = OrientedBox(Vec3(1.0, 0.5, 0.5), Vec3(1.0, 1.0, 1), 0.0)  # touches x=1.5
        assert check_bounds(scene_of_boxes([box], GridSpec(1.0, 2, 2))) == []

    def test_explicit_floor_extent(self):
        box = OrientedBox(Vec3(0.5, 0.5, 0.5), Vec3(1, 1, 1), 0.0)
        scene = scene_of_boxes([box], GridSpec(1.0, 2, 2))
        assert check_bounds(scene, floor_extent_m=(2.0, 2.0)) == []
        assert len(check_bounds(scene, floor_extent_m=(1.0, 1.0))) == 1

    def test_building_envelope(self, vocab):
        ring = (
            "llmslb grid=1m dims=4x4\nmain:\n"
            "w w w w\nw 0 0 w\nw 0 0 w\nw w w w\n"
        )
        building = compile_building(parse_llmslb(ring), vocab)
        inside = scene_of_boxes(
            [OrientedBox(Vec3(1.5, 1.5, 0.4), Vec3(1, 1, 0.8), 0.0)], GridSpec(1.0, 4, 4)
        )
        outside = scene_of_boxes(
            [OrientedBox(Vec3(5.0, 1.5, 0.4), Vec3(1, 1, 0.8), 0.0)], GridSpec(1.0, 4, 4)
        )
        assert check_bounds(inside, building=building) == []
        assert len(check_bounds(outside, building=building)) == 1

    def test_structural_not_checked(self, vocab):
        ring = "llmslb grid=1m dims=4x4\nmain:\nw w w w\nw 0 0 w\nw 0 0 w\nw w w w\n"
        scene = compile_building(parse_llmslb(ring), vocab)
        assert check_bounds(scene, building=scene) == []


class TestValidate:
    def test_passed_iff_no_findings(self, vocab):
        clean = compile_scene(
            parse_llmsli("llmsli grid=1m dims=3x3\nmain:\n0 0 0\n0 sofa 0\n0 0 0\n"),
            vocab,
        )
        report = validate(clean)
        assert report.passed
        assert report.collisions == ()
        assert report.cr_obj_percent == 0.0

    def test_failing_scene(self, vocab):
        src = "llmsli grid=1m dims=4x4\nmain:\n0 0 0 0\n0 sofa 0 0\n0 coffee_table 0 0\n0 0 0 0\n"
        report = validate(compile_scene(parse_llmsli(src), vocab))
        assert not report.passed
        assert report.cr_obj_percent == 100.0
        assert len(report.collisions) == 1

    def test_warnings_carried(self, vocab):
        scene = compile_scene(
            parse_llmsli("llmsli grid=1m dims=1x1\nmain:\nvase\n"), vocab
        )
        report = validate(scene)
        assert report.warnings == scene.warnings
        assert report.passed  # warnings alone do not fail a scene

    def test_custom_eps(self, vocab):
        a = OrientedBox(Vec3(0, 0, 0.5), Vec3(1, 1, 1), 0.0)
        b = OrientedBox(Vec3(0.999, 0, 0.5), Vec3(1, 1, 1), 0.0)
        scene = scene_of_boxes([a, b])
        assert validate(scene).passed is False
        assert validate(scene, ValidatorConfig(eps=0.01)).passed is True

    def test_floor_extent_config(self, vocab):
        box = OrientedBox(Vec3(0.5, 0.5, 0.5), Vec3(1, 1, 1), 0.0)
        scene = scene_of_boxes([box], GridSpec(1.0, 2, 2))
        assert validate(scene, ValidatorConfig(floor_extent_m=(1.0, 1.0))).passed is False

    def test_report_round_trip(self, vocab):
        src = "llmsli grid=1m dims=4x4\nmain:\n0 0 0 0\n0 sofa 0 0\n0 coffee_table 0 0\n0 0 0 0\n"
        report = validate(compile_scene(parse_llmsli(src), vocab))
        assert ValidationReport.from_dict(report.to_dict()) == report

    def test_report_text(self, vocab):
        src = "llmsli grid=1m dims=4x4\nmain:\n0 0 0 0\n0 sofa 0 0\n0 coffee_table 0 0\n0 0 0 0\n"
        report = validate(compile_scene(parse_llmsli(src), vocab))
        text = report_text(report)
        assert "overlaps with" in text
        assert "FAIL" in text or "fail" in text
