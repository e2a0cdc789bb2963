"""Scene data model, JSON/PLY interchange and a synthetic scene generator.

A scene is the minimal slice of an SfM reconstruction that the scoring and
selection code needs: a 3D position per point, the descriptor distances over
the point's track correspondences, and how many cameras observe the point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np


class SceneError(ValueError):
    """Base class for scene loading problems."""


class SceneFormatError(SceneError):
    """The file does not parse under the declared format."""


class SceneValidationError(SceneError):
    """The file parses but violates a scene invariant."""


@dataclass(frozen=True)
class ScenePoint:
    id: int
    position: tuple[float, float, float]
    pair_distances: tuple[float, ...] = ()
    cameras_seen: int = 1


@dataclass(frozen=True)
class SceneModel:
    """Immutable, validated collection of scene points.

    Construct through :func:`make_scene` (or the loaders) to get validation;
    the dataclass constructor itself does not check invariants.
    """

    points: tuple[ScenePoint, ...]
    total_cameras: int
    descriptor_dim: int = 128

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def positions(self) -> np.ndarray:
        """(m, 3) float64 array of point positions, read-only."""
        arr = np.array([p.position for p in self.points], dtype=np.float64).reshape(-1, 3)
        arr.setflags(write=False)
        return arr

    @cached_property
    def cameras_seen(self) -> np.ndarray:
        arr = np.array([p.cameras_seen for p in self.points], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def ids(self) -> np.ndarray:
        arr = np.array([p.id for p in self.points], dtype=np.int64)
        arr.setflags(write=False)
        return arr


def _check_point(p: ScenePoint, total_cameras: int) -> None:
    if not isinstance(p.id, int) or isinstance(p.id, bool) or p.id < 0:
        raise SceneValidationError(f"point id {p.id!r}: id must be a non-negative integer")
    if len(p.position) != 3 or not all(math.isfinite(c) for c in p.position):
        raise SceneValidationError(f"point id {p.id}: position must be 3 finite numbers")
    for dist in p.pair_distances:
        if not math.isfinite(dist) or dist < 0:
            raise SceneValidationError(
                f"point id {p.id}: pair distance {dist!r} is negative or not finite"
            )
    if p.cameras_seen < 1:
        raise SceneValidationError(f"point id {p.id}: cameras_seen must be >= 1")
    if p.cameras_seen > total_cameras:
        raise SceneValidationError(
            f"point id {p.id}: cameras_seen={p.cameras_seen} exceeds total_cameras={total_cameras}"
        )


def validate_scene(scene: SceneModel) -> SceneModel:
    """Raise :class:`SceneValidationError` unless every scene invariant holds."""
    if len(scene.points) == 0:
        raise SceneValidationError("scene has no points")
    if scene.total_cameras < 1:
        raise SceneValidationError("total_cameras must be a positive integer")
    if scene.descriptor_dim < 1:
        raise SceneValidationError("descriptor_dim must be a positive integer")
    seen: set[int] = set()
    for p in scene.points:
        _check_point(p, scene.total_cameras)
        if p.id in seen:
            raise SceneValidationError(f"duplicate point id {p.id}")
        seen.add(p.id)
    return scene


def make_scene(
    points: Sequence[ScenePoint], total_cameras: int, descriptor_dim: int = 128
) -> SceneModel:
    return validate_scene(SceneModel(tuple(points), int(total_cameras), int(descriptor_dim)))


# --- JSON ---------------------------------------------------------------------


def _as_int(value, what: str, index: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SceneFormatError(f"record {index}: {what} must be an integer, got {value!r}")
    return value


def _as_float(value, what: str, index: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneFormatError(f"record {index}: {what} must be a number, got {value!r}")
    return float(value)


def scene_from_dict(doc: dict) -> SceneModel:
    if not isinstance(doc, dict):
        raise SceneFormatError("top level must be a JSON object")
    for key in ("total_cameras", "points"):
        if key not in doc:
            raise SceneFormatError(f"missing top-level key {key!r}")
    total = _as_int(doc["total_cameras"], "total_cameras", -1)
    dim = _as_int(doc.get("descriptor_dim", 128), "descriptor_dim", -1)
    if not isinstance(doc["points"], list):
        raise SceneFormatError("'points' must be a list")
    points = []
    for k, rec in enumerate(doc["points"]):
        if not isinstance(rec, dict):
            raise SceneFormatError(f"record {k}: point must be an object")
        try:
            pos = rec["position"]
            pid = rec["id"]
        except KeyError as exc:
            raise SceneFormatError(f"record {k}: missing key {exc.args[0]!r}") from None
        if not isinstance(pos, list) or len(pos) != 3:
            raise SceneFormatError(f"record {k}: position must be a list of 3 numbers")
        dists = rec.get("pair_distances", [])
        if not isinstance(dists, list):
            raise SceneFormatError(f"record {k}: pair_distances must be a list")
        points.append(
            ScenePoint(
                id=_as_int(pid, "id", k),
                position=tuple(_as_float(c, "position", k) for c in pos),
                pair_distances=tuple(_as_float(d, "pair_distances", k) for d in dists),
                cameras_seen=_as_int(rec.get("cameras_seen", 1), "cameras_seen", k),
            )
        )
    return make_scene(points, total, dim)


def scene_to_dict(scene: SceneModel) -> dict:
    return {
        "total_cameras": scene.total_cameras,
        "descriptor_dim": scene.descriptor_dim,
        "points": [
            {
                "id": p.id,
                "position": list(p.position),
                "pair_distances": list(p.pair_distances),
                "cameras_seen": p.cameras_seen,
            }
            for p in scene.points
        ],
    }


# --- PLY ----------------------------------------------------------------------


def write_ply(path, positions: np.ndarray) -> None:
    """Write an ASCII PLY holding one float x,y,z vertex per row of ``positions``."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(positions)}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    lines.extend(f"{x!r} {y!r} {z!r}" for x, y, z in positions.tolist())
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_ply(path) -> SceneModel:
    """Read an ASCII PLY vertex list as a geometry-only scene.

    Points get ids 0..m-1, no pair distances and ``cameras_seen=1``.
    """
    text = Path(path).read_text(encoding="ascii", errors="strict")
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise SceneFormatError("line 1: missing 'ply' magic")
    n_vertex = None
    props: list[str] = []
    in_vertex = False
    end = None
    for lineno, line in enumerate(lines[1:], start=2):
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise SceneFormatError(f"line {lineno}: only ASCII PLY is supported")
        elif tok[0] == "element":
            in_vertex = len(tok) == 3 and tok[1] == "vertex"
            if in_vertex:
                try:
                    n_vertex = int(tok[2])
                except ValueError:
                    raise SceneFormatError(f"line {lineno}: bad vertex count") from None
        elif tok[0] == "property" and in_vertex:
            props.append(tok[-1])
        elif tok[0] == "end_header":
            end = lineno
            break
    if end is None or n_vertex is None:
        raise SceneFormatError("incomplete PLY header")
    try:
        cols = [props.index(c) for c in ("x", "y", "z")]
    except ValueError:
        raise SceneFormatError("PLY vertex element lacks x/y/z properties") from None
    body = lines[end : end + n_vertex]
    if len(body) < n_vertex:
        raise SceneFormatError(f"expected {n_vertex} vertex records, found {len(body)}")
    points = []
    for k, line in enumerate(body):
        tok = line.split()
        try:
            xyz = tuple(float(tok[c]) for c in cols)
        except (ValueError, IndexError):
            raise SceneFormatError(f"line {end + k + 1}: bad vertex record") from None
        points.append(ScenePoint(id=k, position=xyz))
    return make_scene(points, total_cameras=1)


# --- file API -----------------------------------------------------------------


def load_scene(path, format: str = "json") -> SceneModel:
    path = Path(path)
    if format == "ply":
        return read_ply(path)
    if format != "json":
        raise ValueError(f"unknown scene format {format!r}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"line {exc.lineno}: {exc.msg}") from None
    return scene_from_dict(doc)


def save_scene(scene: SceneModel, path, format: str = "json") -> None:
    if format == "ply":
        write_ply(path, scene.positions)
    elif format == "json":
        Path(path).write_text(json.dumps(scene_to_dict(scene)), encoding="utf-8")
    else:
        raise ValueError(f"unknown scene format {format!r}")


# --- synthetic scenes ---------------------------------------------------------

#: probability that a given additional camera observes a point
SYNTH_VISIBILITY = 0.1
#: per-point mean descriptor distance is uniform on this interval (Root-SIFT-like units)
SYNTH_MEAN_DISTANCE = (0.2, 0.8)
#: shape of the gamma noise around a point's mean descriptor distance
SYNTH_DISTANCE_SHAPE = 8.0


def synth_scene(num_points: int, num_cameras: int, extent: float = 100.0, seed: int = 0) -> SceneModel:
    """Generate a random scene.

    Distributions (all drawn from ``numpy.random.default_rng(seed)``):

    * positions uniform in ``[0, extent)^3``;
    * ``cameras_seen = 1 + Binomial(num_cameras - 1, SYNTH_VISIBILITY)``;
    * the track has ``cameras_seen - 1`` correspondence pairs (consecutive
      observations), so single-view points carry no distances;
    * each point draws a mean distance ``mu ~ U(SYNTH_MEAN_DISTANCE)`` and each of
      its pair distances is ``mu * Gamma(k, 1/k)`` with ``k = SYNTH_DISTANCE_SHAPE``.
    """
    if num_points < 1 or num_cameras < 1:
        raise ValueError("num_points and num_cameras must be >= 1")
    if not extent > 0:
        raise ValueError("extent must be positive")
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0.0, extent, size=(num_points, 3))
    cams = 1 + rng.binomial(num_cameras - 1, SYNTH_VISIBILITY, size=num_points)
    mu = rng.uniform(*SYNTH_MEAN_DISTANCE, size=num_points)
    n_pairs = cams - 1
    k = SYNTH_DISTANCE_SHAPE
    raw = rng.gamma(k, 1.0 / k, size=int(n_pairs.sum())) * np.repeat(mu, n_pairs)
    splits = np.split(raw, np.cumsum(n_pairs)[:-1])
    points = tuple(
        ScenePoint(
            id=i,
            position=tuple(pos[i].tolist()),
            pair_distances=tuple(splits[i].tolist()),
            cameras_seen=int(cams[i]),
        )
        for i in range(num_points)
    )
    return SceneModel(points, int(num_cameras), 128)
