"""2-D segment geometry used by the radio model, sensing and movement."""

from __future__ import annotations

import math

import numpy as np


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def segments_cross(a, b, c, d) -> bool:
    """Proper crossing of segment a-b with segment c-d (touching excluded)."""
    d1 = _cross(c[0], c[1], d[0], d[1], a[0], a[1])
    d2 = _cross(c[0], c[1], d[0], d[1], b[0], b[1])
    d3 = _cross(a[0], a[1], b[0], b[1], c[0], c[1])
    d4 = _cross(a[0], a[1], b[0], b[1], d[0], d[1])
    return d1 * d2 < 0 and d3 * d4 < 0


def point_segment_distance(p, a, b) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def closest_point_on_segment(p, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return a
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    return (ax + t * dx, ay + t * dy)


class WallSet:
    """Wall segments with vectorised crossing-attenuation queries."""

    def __init__(self, walls):
        # walls: iterable of ((x1,y1),(x2,y2), attenuation_db)
        self.walls = list(walls)
        if self.walls:
            self._a = np.array([[w[0][0], w[0][1]] for w in self.walls])
            self._b = np.array([[w[1][0], w[1][1]] for w in self.walls])
            self._att = np.array([w[2] for w in self.walls])
        else:
            self._a = np.zeros((0, 2))
            self._b = np.zeros((0, 2))
            self._att = np.zeros(0)

    def __len__(self):
        return len(self.walls)

    def attenuation(self, p, q) -> float:
        """Total attenuation of walls properly crossed by segment p-q."""
        total = 0.0
        for (a, b, att) in self.walls:
            if segments_cross(p, q, a, b):
                total += att
        return total

    def attenuation_matrix(self, positions: np.ndarray) -> np.ndarray:
        """Symmetric (N,N) crossing-attenuation matrix for all point pairs."""
        n = len(positions)
        out = np.zeros((n, n))
        if not self.walls or n < 2:
            return out
        iu, ju = np.triu_indices(n, 1)
        A = positions[iu]  # (M,2)
        B = positions[ju]
        Wa = self._a[None, :, :]  # (1,W,2)
        Wb = self._b[None, :, :]
        Am = A[:, None, :]  # (M,1,2)
        Bm = B[:, None, :]
        wd = Wb - Wa
        d1 = wd[..., 0] * (Am[..., 1] - Wa[..., 1]) - wd[..., 1] * (Am[..., 0] - Wa[..., 0])
        d2 = wd[..., 0] * (Bm[..., 1] - Wa[..., 1]) - wd[..., 1] * (Bm[..., 0] - Wa[..., 0])
        sd = Bm - Am
        d3 = sd[..., 0] * (Wa[..., 1] - Am[..., 1]) - sd[..., 1] * (Wa[..., 0] - Am[..., 0])
        d4 = sd[..., 0] * (Wb[..., 1] - Am[..., 1]) - sd[..., 1] * (Wb[..., 0] - Am[..., 0])
        crossing = (d1 * d2 < 0) & (d3 * d4 < 0)  # (M,W)
        vals = crossing @ self._att
        out[iu, ju] = vals
        out[ju, iu] = vals
        return out

    def closest_distance(self, p, cap: float = math.inf):
        """(distance, closest point) of the nearest wall, capped."""
        best = cap
        best_pt = None
        for (a, b, _att) in self.walls:
            d = point_segment_distance(p, a, b)
            if d < best:
                best = d
                best_pt = closest_point_on_segment(p, a, b)
        return best, best_pt

    def near_points(self, p, radius: float):
        """(distance, closest point) for every wall within `radius` of p."""
        out = []
        for (a, b, _att) in self.walls:
            d = point_segment_distance(p, a, b)
            if d < radius:
                out.append((d, closest_point_on_segment(p, a, b)))
        return out

    def crosses_any(self, p, q) -> bool:
        return any(segments_cross(p, q, a, b) for (a, b, _att) in self.walls)


def clamp_move(pos, move, walls: WallSet):
    """Clamp a proposed move against walls.

    A move whose path crosses a wall is projected onto that wall's
    direction; if the projected move still crosses anything, it is dropped.
    """
    if not len(walls):
        return move
    target = (pos[0] + move[0], pos[1] + move[1])
    for (a, b, _att) in walls.walls:
        if segments_cross(pos, target, a, b):
            wx, wy = b[0] - a[0], b[1] - a[1]
            L = math.hypot(wx, wy)
            if L == 0:
                return (0.0, 0.0)
            wx, wy = wx / L, wy / L
            dot = move[0] * wx + move[1] * wy
            slid = (dot * wx, dot * wy)
            slid_target = (pos[0] + slid[0], pos[1] + slid[1])
            if walls.crosses_any(pos, slid_target):
                return (0.0, 0.0)
            return slid
    return move


def unit(vx, vy):
    L = math.hypot(vx, vy)
    if L == 0:
        return (0.0, 0.0)
    return (vx / L, vy / L)


def clamp_magnitude(v, cap):
    L = math.hypot(v[0], v[1])
    if L <= cap or L == 0:
        return v
    s = cap / L
    return (v[0] * s, v[1] * s)
