import numpy as np

from .base import Global, BadShiftMap, IncompatibleResolution
from .grid import Grid, GridOrderon, StepFunction, merge_cuts, locate

# A piece maps the source rectangle (u0, u1, a0, a1) of a column strip onto the
# destination rectangle of the target strip by the axis-aligned affine map.
# u is the horizontal position inside the strip normalized to [0, 1].
FULL = (0.0, 1.0, 0.0, 1.0)


def _area(rects) -> np.ndarray:
    return (rects[:, 1] - rects[:, 0]) * (rects[:, 3] - rects[:, 2])


def _check_tiling(rects, name):
    if rects.ndim != 2 or rects.shape[1] != 4 or len(rects) == 0:
        raise BadShiftMap(f"{name}: pieces must be a nonempty list of (u0, u1, a0, a1)")
    if (rects < -Global.TOLERANCE).any() or (rects > 1 + Global.TOLERANCE).any():
        raise BadShiftMap(f"{name}: rectangles must lie in the unit square")
    if (rects[:, 1] <= rects[:, 0]).any() or (rects[:, 3] <= rects[:, 2]).any():
        raise BadShiftMap(f"{name}: rectangles must have positive width and height")
    total = _area(rects).sum()
    if abs(total - 1) > 1e-9:
        raise BadShiftMap(f"{name}: rectangles cover area {total}, expected 1")
    du = np.minimum(rects[:, None, 1], rects[None, :, 1]) - np.maximum(rects[:, None, 0], rects[None, :, 0])
    da = np.minimum(rects[:, None, 3], rects[None, :, 3]) - np.maximum(rects[:, None, 2], rects[None, :, 2])
    overlap = np.clip(du, 0, None) * np.clip(da, 0, None)
    np.fill_diagonal(overlap, 0)
    if overlap.sum() > 1e-9:
        raise BadShiftMap(f"{name}: rectangles overlap")


def _affine(src, dst, u, a):
    su = (dst[..., 1] - dst[..., 0]) / (src[..., 1] - src[..., 0])
    sa = (dst[..., 3] - dst[..., 2]) / (src[..., 3] - src[..., 2])
    return dst[..., 0] + (u - src[..., 0]) * su, dst[..., 2] + (a - src[..., 2]) * sa


def _preimage(src, dst, u, a):
    return _affine(dst, src, u, a)


class ShiftMap:
    """
    Measure-preserving bijection of [0,1]^2 at resolution r: the vertical strip
    of column i goes to the strip of column colperm[i], rearranged by the
    pieces in layerperms[i].
    """

    def __init__(self, colperm, layerperms=None):
        colperm = tuple(int(c) for c in colperm)
        r = len(colperm)
        if r < 1 or sorted(colperm) != list(range(r)):
            raise BadShiftMap(f"Column map must be a permutation of 0..{r - 1}, got {colperm}")
        if layerperms is None:
            layerperms = [[(FULL, FULL)] for _ in range(r)]
        if len(layerperms) != r:
            raise BadShiftMap(f"Got {len(layerperms)} column rearrangements for resolution {r}")

        pieces = []
        for i, column in enumerate(layerperms):
            src = np.array([p[0] for p in column], dtype=float).reshape(-1, 4)
            dst = np.array([p[1] for p in column], dtype=float).reshape(-1, 4)
            _check_tiling(src, f"column {i} sources")
            _check_tiling(dst, f"column {i} destinations")
            if not np.allclose(_area(src), _area(dst), rtol=1e-9, atol=1e-12):
                raise BadShiftMap(f"column {i}: source and destination areas differ")
            src.flags.writeable = False
            dst.flags.writeable = False
            pieces.append((src, dst))

        self.resolution = r
        self.colperm = colperm
        self.layerperms = tuple(pieces)

    def __repr__(self):
        return f"ShiftMap(r={self.resolution}, colperm={list(self.colperm)}, cost={self.shift_cost():.4f})"

    def __eq__(self, other):
        if not isinstance(other, ShiftMap) or self.colperm != other.colperm:
            return False
        return all(
            a.shape == c.shape and np.allclose(a, c) and np.allclose(b, d)
            for (a, b), (c, d) in zip(self.layerperms, other.layerperms)
        )

    @classmethod
    def identity(cls, r):
        return cls(range(r))

    @classmethod
    def vertical(cls, colperm, layer_moves=None):
        """
        Column permutation plus per-column layer moves, each a list of
        ((a0, a1), (b0, b1)) intervals of equal length spanning the column width.
        """
        if layer_moves is None:
            return cls(colperm)
        layerperms = [
            [((0.0, 1.0, s0, s1), (0.0, 1.0, d0, d1)) for (s0, s1), (d0, d1) in moves]
            for moves in layer_moves
        ]
        return cls(colperm, layerperms)

    def is_vertical(self) -> bool:
        return all(
            np.allclose(src[:, :2], [0, 1]) and np.allclose(dst[:, :2], [0, 1])
            for src, dst in self.layerperms
        )

    def shift_cost(self) -> float:
        """sup |x - x'| over the map; exact since every piece is affine in u."""
        r = self.resolution
        cost = 0.0
        for i, (src, dst) in enumerate(self.layerperms):
            offset = self.colperm[i] - i
            left = np.abs(offset + dst[:, 0] - src[:, 0])
            right = np.abs(offset + dst[:, 1] - src[:, 1])
            cost = max(cost, float(max(left.max(), right.max())))
        return cost / r

    def __call__(self, x, a):
        x, a = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(a, dtype=float))
        shape = x.shape
        x, a = x.ravel(), a.ravel()
        r = self.resolution
        col = np.clip(np.floor(x * r).astype(np.int64), 0, r - 1)
        u = x * r - col
        out_x, out_a = np.empty_like(x), np.empty_like(a)
        for i in np.unique(col):
            mask = col == i
            src, dst = self.layerperms[i]
            piece = _find_piece(src, u[mask], a[mask])
            nu, na = _affine(src[piece], dst[piece], u[mask], a[mask])
            out_x[mask] = (self.colperm[i] + np.clip(nu, 0, 1)) / r
            out_a[mask] = np.clip(na, 0, 1)
        return out_x.reshape(shape), out_a.reshape(shape)

    def compose(self, other: "ShiftMap") -> "ShiftMap":
        """self after other: x -> self(other(x))."""
        if other.resolution != self.resolution:
            raise BadShiftMap(
                f"Can't compose resolutions {self.resolution} and {other.resolution}"
            )
        colperm, layerperms = [], []
        for i, (g_src, g_dst) in enumerate(other.layerperms):
            j = other.colperm[i]
            f_src, f_dst = self.layerperms[j]
            pieces = []
            for p in range(len(g_src)):
                for q in range(len(f_src)):
                    mid = _intersect(g_dst[p], f_src[q])
                    if mid is None:
                        continue
                    u0, a0 = _preimage(g_src[p], g_dst[p], mid[0], mid[2])
                    u1, a1 = _preimage(g_src[p], g_dst[p], mid[1], mid[3])
                    v0, b0 = _affine(f_src[q], f_dst[q], mid[0], mid[2])
                    v1, b1 = _affine(f_src[q], f_dst[q], mid[1], mid[3])
                    pieces.append(((u0, u1, a0, a1), (v0, v1, b0, b1)))
            colperm.append(self.colperm[j])
            layerperms.append(pieces)
        return ShiftMap(colperm, layerperms)

    def inverse(self) -> "ShiftMap":
        r = self.resolution
        colperm = [0] * r
        layerperms = [None] * r
        for i, (src, dst) in enumerate(self.layerperms):
            j = self.colperm[i]
            colperm[j] = i
            layerperms[j] = [(tuple(d), tuple(s)) for s, d in zip(src, dst)]
        return ShiftMap(colperm, layerperms)

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "colperm": list(self.colperm),
            "layerperms": [
                [[s.tolist(), d.tolist()] for s, d in zip(src, dst)]
                for src, dst in self.layerperms
            ],
            "shift_cost": self.shift_cost(),
        }


def _find_piece(src, u, a) -> np.ndarray:
    tol = Global.TOLERANCE
    inside = (
        (src[None, :, 0] - tol <= u[:, None])
        & (u[:, None] <= src[None, :, 1] + tol)
        & (src[None, :, 2] - tol <= a[:, None])
        & (a[:, None] <= src[None, :, 3] + tol)
    )
    return np.argmax(inside, axis=1)


def _intersect(p, q):
    u0, u1 = max(p[0], q[0]), min(p[1], q[1])
    a0, a1 = max(p[2], q[2]), min(p[3], q[3])
    if u1 - u0 <= Global.TOLERANCE or a1 - a0 <= Global.TOLERANCE:
        return None
    return u0, u1, a0, a1


def _strip_cuts(grid: Grid, j, r) -> np.ndarray:
    """x-breakpoints of the grid inside strip j, in normalized strip coordinates."""
    u = grid.xcuts * r - j
    return u[(u > Global.TOLERANCE) & (u < 1 - Global.TOLERANCE)]


def apply_shift(W: StepFunction, f: ShiftMap):
    """W^f(v1, v2) = W(f(v1), f(v2)) on the coarsest grid making it a step function."""
    r = f.resolution
    if not W.grid.has_xcuts(np.arange(r + 1) / r):
        raise IncompatibleResolution(
            f"Orderon x-breakpoints must contain the multiples of 1/{r}; "
            f"refine with refine_to_resolution first"
        )

    xcuts = [0.0]
    layers = []
    for i, (src, dst) in enumerate(f.layerperms):
        j = f.colperm[i]
        target_cuts = _strip_cuts(W.grid, j, r)

        ucuts = [src[:, 0], src[:, 1]]
        for s, d in zip(src, dst):
            inner = target_cuts[(target_cuts > d[0]) & (target_cuts < d[1])]
            ucuts.append(_preimage(s, d, inner, 0.0)[0])
        ucuts = merge_cuts([0.0, 1.0], *ucuts)

        for u0, u1 in zip(ucuts[:-1], ucuts[1:]):
            um = (u0 + u1) / 2
            covering = (src[:, 0] <= um) & (um <= src[:, 1])
            acuts = [[0.0, 1.0]]
            for s, d in zip(src[covering], dst[covering]):
                acuts.append([s[2], s[3]])
                # target column of this sub-strip and its layer cuts
                tu, _ = _affine(s, d, um, 0.0)
                c = int(W.grid.column_of((j + tu) / r))
                bcuts = W.grid.layers[c]
                inner = bcuts[(bcuts > d[2]) & (bcuts < d[3])]
                acuts.append(_preimage(s, d, 0.0, inner)[1])
            xcuts.append((i + u1) / r)
            layers.append(merge_cuts(*acuts))

    grid = Grid(xcuts, layers)
    src_cells = W.grid.cell_index(*f(*grid.midpoints()))
    return type(W)(grid, W.values[np.ix_(src_cells, src_cells)])


def strip_cells(W: StepFunction, i, r):
    """Cells of strip i as normalized rectangles, ordered by degree (largest first, stable)."""
    grid = W.grid
    mask = (grid.cell_x0 >= (i - Global.TOLERANCE * r) / r) & (
        grid.cell_x1 <= (i + 1 + Global.TOLERANCE * r) / r
    )
    cells = np.flatnonzero(mask)
    order = np.argsort(-W.degrees()[cells], kind="stable")
    cells = cells[order]
    return np.column_stack(
        [
            grid.cell_x0[cells] * r - i,
            grid.cell_x1[cells] * r - i,
            grid.cell_a0[cells],
            grid.cell_a1[cells],
        ]
    )


def _slab(rect, o0, o1):
    """Horizontal slab of rect holding normalized mass [o0, o1] counted from its bottom."""
    width = rect[1] - rect[0]
    a0 = min(rect[2] + o0 / width, rect[3])
    a1 = min(rect[2] + o1 / width, rect[3])
    return (float(rect[0]), float(rect[1]), float(a0), float(a1))


def quantile_pieces(dom, tgt):
    """Match two lists of rectangles (each tiling the unit square) by cumulative area."""
    cd = np.concatenate([[0.0], np.cumsum(_area(dom))])
    ct = np.concatenate([[0.0], np.cumsum(_area(tgt))])
    cuts = merge_cuts(cd, ct)
    pieces = []
    for q0, q1 in zip(cuts[:-1], cuts[1:]):
        mid = (q0 + q1) / 2
        k = int(locate(cd, mid))
        m = int(locate(ct, mid))
        src = _slab(dom[k], q0 - cd[k], q1 - cd[k])
        dst = _slab(tgt[m], q0 - ct[m], q1 - ct[m])
        if src[3] - src[2] <= Global.TOLERANCE or dst[3] - dst[2] <= Global.TOLERANCE:
            continue
        pieces.append((src, dst))
    return pieces


def quantile_map(W: StepFunction, U: StepFunction, colperm) -> ShiftMap:
    """
    Column permutation plus, inside every strip, the rearrangement sending the
    cells of W sorted by degree onto the cells of U sorted by degree. Both
    inputs must have x-breakpoints at the multiples of 1/r.
    """
    r = len(colperm)
    layerperms = [
        quantile_pieces(strip_cells(W, i, r), strip_cells(U, colperm[i], r))
        for i in range(r)
    ]
    return ShiftMap(colperm, layerperms)
