"""Grid scenes, agent kinematics, and geodesic distances.

World frame: x grows with column index, y with row index; cell (r, c)
covers [c*s, (c+1)*s) x [r*s, (r+1)*s) for cell size s. Headings are
degrees in [0, 360), counter-clockwise, 0 = +x, always multiples of 22.5
(all exactly representable doubles, so turn arithmetic is exact).

Cells holding an object instance are solid: they block both movement and
rays, and carry the instance's class for rendering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from gridloop import kernels

FORWARD_M = 0.2
TURN_DEG = 22.5
N_HEADINGS = 16

FREE = 0
WALL = 1


class SceneError(ValueError):
    """Malformed scene file; carries the offending line number."""

    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class ActionPrimitive(Enum):
    FORWARD = "forward"
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    STOP = "stop"
    NULL = "null"


# An action sequence is a plain tuple of primitives.
ActionSequence = tuple[ActionPrimitive, ...]

_MOVE_PRIMITIVES = (
    ActionPrimitive.FORWARD,
    ActionPrimitive.TURN_LEFT,
    ActionPrimitive.TURN_RIGHT,
)


def validate_plan(seq: ActionSequence) -> None:
    """Check the invariants of a planner-facing sequence.

    Length >= 1, nothing after a STOP, and no NULL (that token exists only
    to pad frame/action alignment in recorded trajectories).
    """
    if len(seq) < 1:
        raise ValueError("empty action sequence")
    for i, a in enumerate(seq):
        if a is ActionPrimitive.NULL:
            raise ValueError("null action in plan")
        if a is ActionPrimitive.STOP and i != len(seq) - 1:
            raise ValueError("action after stop")


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading_deg: float

    def __post_init__(self):
        if self.heading_deg % TURN_DEG != 0.0 or not 0.0 <= self.heading_deg < 360.0:
            raise ValueError(f"heading {self.heading_deg} not a multiple of {TURN_DEG} in [0,360)")


@dataclass(frozen=True)
class Instance:
    instance_id: int
    class_id: int
    display_name: str
    centroid: tuple[int, int]  # (row, col)


@dataclass(frozen=True)
class GridScene:
    width: int
    height: int
    cell_size_m: float
    occupancy: np.ndarray  # uint8 (h, w), 0 free / 1 wall (objects included)
    class_id: np.ndarray  # int32 (h, w), 0 background
    instance_id: np.ndarray  # int32 (h, w), 0 none
    instances: dict[int, Instance]
    _dfield_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.cell_size_m <= 0:
            raise ValueError("cell_size_m must be positive")
        for g in (self.occupancy, self.class_id, self.instance_id):
            if g.shape != (self.height, self.width):
                raise ValueError("grid dimensions disagree")
        self.occupancy.setflags(write=False)
        self.class_id.setflags(write=False)
        self.instance_id.setflags(write=False)

    # -- cell geometry ------------------------------------------------

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        inv = 1.0 / self.cell_size_m
        return int(math.floor(y * inv)), int(math.floor(x * inv))

    def cell_center(self, cell: tuple[int, int]) -> tuple[float, float]:
        r, c = cell
        return (c + 0.5) * self.cell_size_m, (r + 0.5) * self.cell_size_m

    def in_bounds(self, r: int, c: int) -> bool:
        return 0 <= r < self.height and 0 <= c < self.width

    def is_free(self, r: int, c: int) -> bool:
        return self.in_bounds(r, c) and self.occupancy[r, c] == FREE

    def pose_valid(self, pose: Pose) -> bool:
        r, c = self.cell_of(pose.x, pose.y)
        return self.is_free(r, c)

    def free_cells(self) -> list[tuple[int, int]]:
        rs, cs = np.nonzero(self.occupancy == FREE)
        return list(zip(rs.tolist(), cs.tolist()))

    def free_area_m2(self) -> float:
        n = int(np.count_nonzero(self.occupancy == FREE))
        return n * self.cell_size_m * self.cell_size_m

    # -- geodesics ----------------------------------------------------

    def distance_field(self, src: tuple[int, int]) -> np.ndarray:
        """Geodesic distance (meters) from src to every cell; inf unreachable.

        Memoised: scenes are immutable and fields get reused heavily by
        episode validation and dataset generation.
        """
        if src not in self._dfield_cache:
            free = (self.occupancy == FREE).astype(np.uint8)
            dist_cells, _ = kernels.dijkstra_grid(free, src[0], src[1])
            field_m = dist_cells * self.cell_size_m
            field_m.setflags(write=False)
            self._dfield_cache[src] = field_m
        return self._dfield_cache[src]

    def path_cells(self, a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
        """Cell-by-cell shortest path a..b (inclusive); [] if unreachable."""
        free = (self.occupancy == FREE).astype(np.uint8)
        dist, pred = kernels.dijkstra_grid(free, a[0], a[1])
        if not np.isfinite(dist[b[0], b[1]]):
            return []
        deltas = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
        cells = [b]
        r, c = b
        while (r, c) != a:
            k = pred[r, c]
            dr, dc = deltas[k]
            r, c = r - dr, c - dc
            cells.append((r, c))
        cells.reverse()
        return cells


def heading_quantize(bearing_deg: float) -> float:
    """Nearest admissible heading to an arbitrary bearing."""
    k = int(round(bearing_deg / TURN_DEG)) % N_HEADINGS
    return k * TURN_DEG


def turn_actions(from_deg: float, to_deg: float) -> list[ActionPrimitive]:
    """Minimal turn sequence from one heading to another (left wins ties)."""
    delta = (to_deg - from_deg) % 360.0
    left = int(round(delta / TURN_DEG))
    if left <= N_HEADINGS - left:
        return [ActionPrimitive.TURN_LEFT] * left
    return [ActionPrimitive.TURN_RIGHT] * (N_HEADINGS - left)


def apply_action(scene: GridScene, pose: Pose, action: ActionPrimitive) -> Pose:
    """One kinematic step. Total: blocked forward moves are a no-op."""
    if action is ActionPrimitive.TURN_LEFT:
        return Pose(pose.x, pose.y, (pose.heading_deg + TURN_DEG) % 360.0)
    if action is ActionPrimitive.TURN_RIGHT:
        return Pose(pose.x, pose.y, (pose.heading_deg - TURN_DEG) % 360.0)
    if action is ActionPrimitive.FORWARD:
        clear = kernels.clear_distance(
            scene.occupancy, scene.cell_size_m, pose.x, pose.y, pose.heading_deg
        )
        if clear <= FORWARD_M:
            return pose
        rad = pose.heading_deg * (math.pi / 180.0)
        return Pose(
            pose.x + FORWARD_M * math.cos(rad),
            pose.y + FORWARD_M * math.sin(rad),
            pose.heading_deg,
        )
    return pose  # STOP / NULL


def fold_free(pose: Pose, seq: ActionSequence) -> Pose:
    """Kinematics fold in an obstacle-free frame (commanded intent)."""
    x, y, h = pose.x, pose.y, pose.heading_deg
    for a in seq:
        if a is ActionPrimitive.TURN_LEFT:
            h = (h + TURN_DEG) % 360.0
        elif a is ActionPrimitive.TURN_RIGHT:
            h = (h - TURN_DEG) % 360.0
        elif a is ActionPrimitive.FORWARD:
            rad = h * (math.pi / 180.0)
            x += FORWARD_M * math.cos(rad)
            y += FORWARD_M * math.sin(rad)
    return Pose(x, y, h)


def geodesic_distance(scene: GridScene, a: tuple[int, int], b: tuple[int, int]) -> float:
    """Shortest 8-connected path length in meters; math.inf when unreachable.

    Step cost is cell_size along axes and cell_size*sqrt(2) on diagonals;
    diagonal steps additionally require both adjacent axis cells free.
    """
    if not scene.is_free(*a) or not scene.is_free(*b):
        raise ValueError("geodesic endpoints must be free cells")
    return float(scene.distance_field(a)[b[0], b[1]])


def _compress_segments(cells: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Keep only the corner cells (and endpoints) of a cell path."""
    if len(cells) <= 2:
        return cells[-1:] if len(cells) == 2 else []
    out = []
    prev_dir = None
    for i in range(1, len(cells)):
        d = (cells[i][0] - cells[i - 1][0], cells[i][1] - cells[i - 1][1])
        if prev_dir is not None and d != prev_dir:
            out.append(cells[i - 1])
        prev_dir = d
    out.append(cells[-1])
    return out


def shortest_path(
    scene: GridScene,
    a: tuple[int, int],
    b: tuple[int, int],
    start_heading_deg: float = 0.0,
) -> tuple[list[Pose], ActionSequence]:
    """Realise the geodesic a->b as poses plus the actions that replay them.

    Walks the compressed corner waypoints of the cell path with a greedy
    turn-to-bearing/step controller; every returned pose is the exact
    apply_action fold of the returned actions, and the final pose lands
    within one cell size of b's center (a two-step polish handles the
    quantisation stall near the target).
    """
    cells = scene.path_cells(a, b)
    if not cells:
        raise ValueError("unreachable cell pair")
    tol = scene.cell_size_m

    pose = Pose(*scene.cell_center(a), start_heading_deg)
    poses = [pose]
    actions: list[ActionPrimitive] = []

    def push(act: ActionPrimitive) -> None:
        nonlocal pose
        pose = apply_action(scene, pose, act)
        actions.append(act)
        poses.append(pose)

    waypoints = [scene.cell_center(c) for c in _compress_segments(cells)]
    for wi, (wx, wy) in enumerate(waypoints):
        final = wi == len(waypoints) - 1
        budget = 8 + 2 * int(math.hypot(wx - pose.x, wy - pose.y) / FORWARD_M)
        while budget > 0:
            budget -= 1
            d = math.hypot(wx - pose.x, wy - pose.y)
            if d <= tol:
                break
            bearing = math.degrees(math.atan2(wy - pose.y, wx - pose.x))
            target_h = heading_quantize(bearing)
            for t in turn_actions(pose.heading_deg, target_h):
                push(t)
            before = pose
            push(ActionPrimitive.FORWARD)
            if pose == before:  # blocked: sidestep via the closer adjacent heading
                moved = False
                for t in (ActionPrimitive.TURN_LEFT, ActionPrimitive.TURN_RIGHT):
                    push(t)
                    before = pose
                    push(ActionPrimitive.FORWARD)
                    if pose != before:
                        moved = True
                        break
                    push(_inverse_turn(t))
                if not moved:
                    break
            if math.hypot(wx - pose.x, wy - pose.y) >= d:
                break
        if final and math.hypot(wx - pose.x, wy - pose.y) > tol:
            _final_polish(scene, push, lambda: pose, wx, wy)
    return poses, tuple(actions)


def _inverse_turn(t: ActionPrimitive) -> ActionPrimitive:
    if t is ActionPrimitive.TURN_LEFT:
        return ActionPrimitive.TURN_RIGHT
    return ActionPrimitive.TURN_LEFT


def _final_polish(scene, push, get_pose, wx, wy) -> None:
    """Two-step lookahead for targets just outside one forward step."""
    pose = get_pose()
    best = None
    for k1 in range(N_HEADINGS):
        h1 = k1 * TURN_DEG
        rad1 = h1 * (math.pi / 180.0)
        x1 = pose.x + FORWARD_M * math.cos(rad1)
        y1 = pose.y + FORWARD_M * math.sin(rad1)
        d1 = math.hypot(wx - x1, wy - y1)
        cand = (d1, len(turn_actions(pose.heading_deg, h1)), (h1,))
        if best is None or cand[:2] < best[:2]:
            best = cand
        for k2 in range(N_HEADINGS):
            h2 = k2 * TURN_DEG
            rad2 = h2 * (math.pi / 180.0)
            x2 = x1 + FORWARD_M * math.cos(rad2)
            y2 = y1 + FORWARD_M * math.sin(rad2)
            d2 = math.hypot(wx - x2, wy - y2)
            n_turn = len(turn_actions(pose.heading_deg, h1)) + len(turn_actions(h1, h2))
            cand = (d2, n_turn, (h1, h2))
            if cand[:2] < best[:2]:
                best = cand
    d0 = math.hypot(wx - pose.x, wy - pose.y)
    if best is None or best[0] >= d0:
        return
    cur = pose.heading_deg
    for h in best[2]:
        for t in turn_actions(cur, h):
            push(t)
        before = get_pose()
        push(ActionPrimitive.FORWARD)
        if get_pose() == before:
            return
        cur = h


# -- scene file format ------------------------------------------------


def parse_scene_file(text: str) -> GridScene:
    """Parse the line-oriented scene format.

    Line 1: ``GRID <width> <height> <cell_size_m>``; then height rows of
    glyphs (``#`` wall, ``.`` free, ``a``-``z`` instance cells); then
    ``INST <glyph> <instance_id> <class_id> <display_name>`` lines.
    """
    lines = text.splitlines()
    if not lines:
        raise SceneError(1, "empty scene file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "GRID":
        raise SceneError(1, f"malformed header: {lines[0]!r}")
    try:
        width, height = int(head[1]), int(head[2])
        cell_size = float(head[3])
    except ValueError:
        raise SceneError(1, f"malformed header: {lines[0]!r}") from None
    if width < 1 or height < 1 or cell_size <= 0:
        raise SceneError(1, "grid dimensions and cell size must be positive")
    if len(lines) < 1 + height:
        raise SceneError(len(lines), f"expected {height} grid rows")

    occ = np.zeros((height, width), dtype=np.uint8)
    cls = np.zeros((height, width), dtype=np.int32)
    inst = np.zeros((height, width), dtype=np.int32)
    glyph_cells: dict[str, list[tuple[int, int]]] = {}
    for r in range(height):
        row = lines[1 + r]
        line_no = 2 + r
        if len(row) != width:
            raise SceneError(line_no, f"row has {len(row)} glyphs, expected {width}")
        for c, g in enumerate(row):
            if g == "#":
                occ[r, c] = WALL
            elif g == ".":
                pass
            elif "a" <= g <= "z":
                occ[r, c] = WALL
                glyph_cells.setdefault(g, []).append((r, c))
            else:
                raise SceneError(line_no, f"unknown glyph {g!r}")

    glyph_inst: dict[str, tuple[int, int, str]] = {}
    for i, line in enumerate(lines[1 + height :]):
        line_no = 2 + height + i
        if not line.strip():
            continue
        parts = line.split(None, 4)
        if len(parts) != 5 or parts[0] != "INST":
            raise SceneError(line_no, f"malformed instance line: {line!r}")
        _, g, iid_s, cid_s, name = parts
        try:
            iid, cid = int(iid_s), int(cid_s)
        except ValueError:
            raise SceneError(line_no, f"malformed instance ids: {line!r}") from None
        if iid <= 0 or cid <= 0:
            raise SceneError(line_no, "instance and class ids must be positive")
        if g not in glyph_cells:
            raise SceneError(line_no, f"instance glyph {g!r} absent from grid")
        if g in glyph_inst:
            raise SceneError(line_no, f"duplicate instance glyph {g!r}")
        glyph_inst[g] = (iid, cid, name)

    for g in glyph_cells:
        if g not in glyph_inst:
            first = glyph_cells[g][0]
            raise SceneError(2 + first[0], f"glyph {g!r} has no INST line")

    instances: dict[int, Instance] = {}
    for g, (iid, cid, name) in sorted(glyph_inst.items()):
        cells = glyph_cells[g]
        if iid in instances:
            raise SceneError(1, f"duplicate instance id {iid}")
        for r, c in cells:
            cls[r, c] = cid
            inst[r, c] = iid
        cr = int(math.floor(sum(r for r, _ in cells) / len(cells) + 0.5))
        cc = int(math.floor(sum(c for _, c in cells) / len(cells) + 0.5))
        instances[iid] = Instance(iid, cid, name, (cr, cc))

    return GridScene(width, height, cell_size, occ, cls, inst, instances)


def serialize_scene(scene: GridScene) -> str:
    """Inverse of parse_scene_file (modulo instance-line order)."""
    glyphs = "abcdefghijklmnopqrstuvwxyz"
    ids = sorted(scene.instances)
    if len(ids) > len(glyphs):
        raise ValueError("too many instances for the glyph alphabet")
    glyph_of = {iid: glyphs[i] for i, iid in enumerate(ids)}
    rows = []
    for r in range(scene.height):
        row = []
        for c in range(scene.width):
            iid = int(scene.instance_id[r, c])
            if iid:
                row.append(glyph_of[iid])
            elif scene.occupancy[r, c] == WALL:
                row.append("#")
            else:
                row.append(".")
        rows.append("".join(row))
    out = [f"GRID {scene.width} {scene.height} {scene.cell_size_m!r}"]
    out.extend(rows)
    for iid in ids:
        info = scene.instances[iid]
        out.append(f"INST {glyph_of[iid]} {iid} {info.class_id} {info.display_name}")
    return "\n".join(out) + "\n"


def load_scene(path) -> GridScene:
    with open(path, "r", encoding="utf-8") as f:
        return parse_scene_file(f.read())


def save_scene(scene: GridScene, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_scene(scene))
