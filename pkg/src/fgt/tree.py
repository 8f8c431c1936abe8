"""Level-restricted adaptive 2^d-trees for point sets and continuous densities.

Boxes are stored struct-of-arrays with integer grid coordinates per level,
so neighbor queries are dictionary lookups.  All neighbor/interaction lists
carry an explicit unit-cell image shift (always zero in free space), which
makes the periodic wrap exact: a pair that touches through both faces of
the cell appears once per image.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .planewave import clamp_tolerance, cutoff_factor
from .poly1d import LegendreBasis, tail_error, vals_to_coeffs

MAX_LEVEL = 30

FGTT_MAGIC = b"FGTT"
FGTT_VERSION = 1


def cutoff_level(delta, epsilon, L0=1.0, kind="density"):
    """Cutoff level and plane-wave range factor.

    kind="point": L0 is the extent of the point cloud; the root side is
    the smallest 2^l_c * D0*sqrt(delta) covering it and cutoff boxes have
    side exactly D0*sqrt(delta), giving R = 2*D0.

    kind="density": the root box is fixed with side L0; the cutoff side
    s = L0/2^l_c then satisfies s in (D0*sqrt(delta), 2*D0*sqrt(delta)]
    and R = 2*s/sqrt(delta) lands in (2*D0, 4*D0].
    """
    if delta <= 0 or L0 < 0:
        raise ValueError("delta and L0 must be positive")
    D0 = cutoff_factor(clamp_tolerance(epsilon))
    cut = D0 * np.sqrt(delta)
    if kind == "point":
        if L0 <= cut:
            return 0, 2.0 * D0
        l_c = int(np.ceil(np.log2(L0 / cut) - 1e-12))
        return min(l_c, MAX_LEVEL), 2.0 * D0
    if kind == "density":
        l_c = max(0, int(np.ceil(np.log2(L0 / (2.0 * cut)) - 1e-12)))
        l_c = min(l_c, MAX_LEVEL)
        s = L0 / 2 ** l_c
        R = max(2.0 * s / np.sqrt(delta), D0)
        return l_c, R
    raise ValueError(f"unknown tree kind {kind!r}")


@dataclass
class Tree:
    """Adaptive 2^d-tree over a cubic root box.

    children rows are -1 for leaves; coords are integer grid positions at
    the box's own level, so box centers are
    root_low + (coords + 1/2) * side(level).
    """

    dim: int
    root_center: np.ndarray
    root_side: float
    periodic: bool
    level: np.ndarray
    parent: np.ndarray
    children: np.ndarray
    coords: np.ndarray
    is_leaf: np.ndarray
    _level_maps: list = field(default=None, repr=False)

    @property
    def n_boxes(self):
        return self.level.shape[0]

    @property
    def n_levels(self):
        return int(self.level.max()) + 1

    @property
    def root_low(self):
        return self.root_center - 0.5 * self.root_side

    def side(self, level):
        return self.root_side / 2 ** np.asarray(level)

    def centers(self, ids=slice(None)):
        lv = self.level[ids]
        s = self.root_side / 2.0 ** lv
        return self.root_low + (self.coords[ids] + 0.5) * s[..., None]

    def boxes_at_level(self, l):
        return np.nonzero(self.level == l)[0]

    def leaves(self):
        return np.nonzero(self.is_leaf)[0]

    def level_map(self, l):
        """Dict mapping coordinate tuples to box ids at level l."""
        if self._level_maps is None:
            self._level_maps = [dict() for _ in range(self.n_levels)]
            for b in range(self.n_boxes):
                self._level_maps[self.level[b]][tuple(self.coords[b])] = b
        return self._level_maps[l] if l < len(self._level_maps) else {}

    def find_covering(self, l, coords):
        """Deepest existing box at level <= l containing the given cell."""
        c = np.asarray(coords)
        for lv in range(l, -1, -1):
            b = self.level_map(lv).get(tuple(c))
            if b is not None:
                return b
            c = c >> 1
        raise RuntimeError("tree has no root covering the query cell")


class _Builder:
    """Mutable tree under construction."""

    def __init__(self, dim, root_center, root_side, periodic=False):
        self.dim = dim
        self.root_center = np.asarray(root_center, dtype=float)
        self.root_side = float(root_side)
        self.periodic = periodic
        self.level = [0]
        self.parent = [-1]
        self.children = [np.full(2 ** dim, -1, dtype=np.int64)]
        self.coords = [np.zeros(dim, dtype=np.int64)]
        self.maps = [{tuple(np.zeros(dim, dtype=np.int64)): 0}]
        self.child_bits = np.array(
            [[(c >> k) & 1 for k in range(dim)] for c in range(2 ** dim)], dtype=np.int64)

    @property
    def n_boxes(self):
        return len(self.level)

    def is_leaf(self, b):
        return self.children[b][0] < 0

    def center(self, b):
        s = self.root_side / 2 ** self.level[b]
        return self.root_center - 0.5 * self.root_side + (self.coords[b] + 0.5) * s

    def split(self, b):
        """Create the 2^d children of leaf b; returns their ids."""
        l = self.level[b] + 1
        if l > MAX_LEVEL:
            raise RuntimeError(f"refinement beyond maximum level {MAX_LEVEL}")
        while len(self.maps) <= l:
            self.maps.append({})
        ids = []
        base = 2 * self.coords[b]
        kids = self.children[b]
        for c in range(2 ** self.dim):
            nid = self.n_boxes
            g = base + self.child_bits[c]
            self.level.append(l)
            self.parent.append(b)
            self.children.append(np.full(2 ** self.dim, -1, dtype=np.int64))
            self.coords.append(g)
            self.maps[l][tuple(g)] = nid
            kids[c] = nid
            ids.append(nid)
        return ids

    def find_covering(self, l, coords):
        c = np.asarray(coords)
        for lv in range(min(l, len(self.maps) - 1), -1, -1):
            b = self.maps[lv].get(tuple(c))
            if b is not None:
                return b
            c = c >> 1
        raise RuntimeError("no covering box")

    def neighbor_cells(self, b, include_self=False):
        """Wrapped neighbor coords of box b at its level, with image shifts."""
        l = self.level[b]
        n_side = 2 ** l
        g = self.coords[b]
        out = []
        for off in _offsets(self.dim):
            if not include_self and not any(off):
                continue
            n = g + off
            if self.periodic:
                v = n // n_side
                out.append((n - v * n_side, v))
            else:
                if np.any(n < 0) or np.any(n >= n_side):
                    continue
                out.append((n, np.zeros(self.dim, dtype=np.int64)))
        return out

    def balance(self, on_split=None):
        """Enforce the 2:1 level restriction between touching leaves.

        on_split(parent_id, child_ids) is invoked after every subdivision so
        the caller can redistribute points or fill grid data.
        """
        queue = [b for b in range(self.n_boxes) if self.is_leaf(b)]
        while queue:
            b = queue.pop()
            if not self.is_leaf(b):
                continue
            l = self.level[b]
            if l < 2:
                continue
            again = False
            for cell, _v in self.neighbor_cells(b):
                nb = self.find_covering(l, cell)
                if self.is_leaf(nb) and l - self.level[nb] >= 2:
                    kids = self.split(nb)
                    if on_split is not None:
                        on_split(nb, kids)
                    queue.extend(kids)
                    again = True
            if again:
                queue.append(b)
        return self

    def finalize(self):
        return Tree(
            dim=self.dim,
            root_center=self.root_center,
            root_side=self.root_side,
            periodic=self.periodic,
            level=np.asarray(self.level, dtype=np.int64),
            parent=np.asarray(self.parent, dtype=np.int64),
            children=np.asarray(self.children, dtype=np.int64).reshape(self.n_boxes, 2 ** self.dim),
            coords=np.asarray(self.coords, dtype=np.int64).reshape(self.n_boxes, self.dim),
            is_leaf=np.asarray([self.is_leaf(b) for b in range(self.n_boxes)], dtype=bool),
        )


def _offsets(dim):
    out = []
    rng = (-1, 0, 1)
    if dim == 1:
        return [np.array([o]) for o in rng]
    if dim == 2:
        return [np.array([a, b]) for a in rng for b in rng]
    return [np.array([a, b, c]) for a in rng for b in rng for c in rng]


@dataclass
class PointPartition:
    """Box-sorted view of the input sources and targets."""

    src_perm: np.ndarray
    tgt_perm: np.ndarray
    src_start: np.ndarray
    src_count: np.ndarray
    tgt_start: np.ndarray
    tgt_count: np.ndarray
    n_points: np.ndarray        # sources + targets per box (subtree totals)


def build_point_tree(sources, targets, n_s, delta, epsilon, periodic=False):
    """Alg: level-restricted adaptive tree sorting sources and targets.

    Boxes holding more than n_s points (sources plus targets) are split
    until the cutoff level; the tree is then balanced and any coarse
    neighbor of a still-dense cutoff leaf is refined away.  Returns
    (tree, partition, l_c, R).
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if sources.size == 0 and targets.size == 0:
        raise ValueError("need at least one source or target")
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    dim = sources.shape[1]
    allpts = np.vstack([sources, targets])
    if periodic:
        root_center = np.full(dim, 0.0)
        root_side = 1.0
        l_c, R = cutoff_level(delta, epsilon, 1.0, kind="density")
    else:
        lo = allpts.min(axis=0)
        hi = allpts.max(axis=0)
        root_center = 0.5 * (lo + hi)
        spread = float((hi - lo).max())
        l_c, R = cutoff_level(delta, epsilon, spread, kind="point")
        D0 = cutoff_factor(clamp_tolerance(epsilon))
        root_side = 2 ** l_c * D0 * np.sqrt(delta)
        if root_side < spread:          # guard against roundoff in l_c
            l_c += 1
            root_side *= 2.0

    bld = _Builder(dim, root_center, root_side, periodic=periodic)
    src_ids = {0: np.arange(sources.shape[0])}
    tgt_ids = {0: np.arange(targets.shape[0])}

    def redistribute(b, kids):
        cb = bld.center(b)
        for store, pts in ((src_ids, sources), (tgt_ids, targets)):
            idx = store.pop(b, None)
            if idx is None or idx.size == 0:
                for c in kids:
                    store[c] = np.array([], dtype=np.int64)
                continue
            p = pts[idx]
            childno = np.zeros(idx.size, dtype=np.int64)
            for k in range(dim):
                childno |= (p[:, k] >= cb[k]).astype(np.int64) << k
            for c, kid in enumerate(kids):
                store[kid] = idx[childno == c]

    frontier = [0]
    for l in range(l_c):
        nxt = []
        for b in frontier:
            n_here = src_ids.get(b, _EMPTY).size + tgt_ids.get(b, _EMPTY).size
            if n_here > n_s:
                kids = bld.split(b)
                redistribute(b, kids)
                nxt.extend(kids)
        frontier = nxt

    bld.balance(on_split=redistribute)

    # a dense leaf at the cutoff level must have no coarse neighbors
    while True:
        changed = False
        for b in range(bld.n_boxes):
            if not bld.is_leaf(b) or bld.level[b] != l_c:
                continue
            n_here = src_ids.get(b, _EMPTY).size + tgt_ids.get(b, _EMPTY).size
            if n_here <= n_s:
                continue
            for cell, _v in bld.neighbor_cells(b):
                nb = bld.find_covering(l_c, cell)
                if bld.is_leaf(nb) and bld.level[nb] == l_c - 1:
                    kids = bld.split(nb)
                    redistribute(nb, kids)
                    changed = True
        if not changed:
            break
        bld.balance(on_split=redistribute)

    tree = bld.finalize()
    part = _sort_points(tree, src_ids, tgt_ids)
    return tree, part, l_c, R


_EMPTY = np.array([], dtype=np.int64)


def _sort_points(tree, src_ids, tgt_ids):
    nb = tree.n_boxes
    src_start = np.zeros(nb, dtype=np.int64)
    src_count = np.zeros(nb, dtype=np.int64)
    tgt_start = np.zeros(nb, dtype=np.int64)
    tgt_count = np.zeros(nb, dtype=np.int64)
    src_chunks, tgt_chunks = [], []
    s = t = 0
    for b in range(nb):
        if not tree.is_leaf[b]:
            continue
        si = src_ids.get(b, _EMPTY)
        ti = tgt_ids.get(b, _EMPTY)
        src_start[b], src_count[b] = s, si.size
        tgt_start[b], tgt_count[b] = t, ti.size
        s += si.size
        t += ti.size
        src_chunks.append(si)
        tgt_chunks.append(ti)
    src_perm = np.concatenate(src_chunks) if src_chunks else _EMPTY
    tgt_perm = np.concatenate(tgt_chunks) if tgt_chunks else _EMPTY
    n_points = np.zeros(nb, dtype=np.int64)
    order = np.argsort(tree.level, kind="stable")[::-1]
    for b in order:
        if tree.is_leaf[b]:
            n_points[b] = src_count[b] + tgt_count[b]
        if tree.parent[b] >= 0:
            n_points[tree.parent[b]] += n_points[b]
    return PointPartition(src_perm=src_perm, tgt_perm=tgt_perm,
                          src_start=src_start, src_count=src_count,
                          tgt_start=tgt_start, tgt_count=tgt_count,
                          n_points=n_points)


def leaf_grid_points(tree, box, basis):
    """Tensor-product Legendre nodes of a box, shape (k,)*d + (d,)."""
    d = tree.dim
    c = tree.centers(box)
    s = float(tree.side(tree.level[box]))
    axes = [c[k] + 0.5 * s * basis.nodes for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def build_density_tree(density, dim, k, epsilon, periodic=False, l_max=MAX_LEVEL,
                       refill="evaluate", root_center=None, root_side=1.0):
    """Resolve a continuous density on a level-restricted adaptive tree.

    density maps an (..., dim) array of points to values.  Every leaf keeps
    its k^dim tensor samples and Legendre coefficients; a leaf is split
    while the coefficient-tail error exceeds epsilon * ||sigma||_2.  New
    leaves created by balancing get data either by re-evaluation
    (refill="evaluate") or by interpolation from the parent polynomial.

    Returns (tree, values, coeffs) with values/coeffs dicts keyed by box id.
    """
    if root_center is None:
        root_center = np.zeros(dim)
    epsilon = clamp_tolerance(epsilon)
    basis = LegendreBasis.build(k)
    bld = _Builder(dim, root_center, root_side, periodic=periodic)
    values, coeffs = {}, {}

    def sample(b):
        pts = _builder_grid_points(bld, b, basis)
        v = np.asarray(density(pts), dtype=float)
        values[b] = v
        coeffs[b] = vals_to_coeffs(v, basis, dim)

    def norm_estimate():
        total = 0.0
        w = basis.weights
        wt = w
        for _ in range(dim - 1):
            wt = np.multiply.outer(wt, w)
        for b, v in values.items():
            if bld.is_leaf(b):
                s = bld.root_side / 2 ** bld.level[b]
                total += (s / 2.0) ** dim * float(np.sum(wt * v * v))
        return np.sqrt(total) / root_side ** (dim / 2.0)

    sample(0)
    frontier = [0]
    for l in range(l_max + 1):
        sigma_norm = max(norm_estimate(), 1e-300)
        splits = [b for b in frontier if tail_error(coeffs[b]) > epsilon * sigma_norm]
        if not splits:
            break
        if l == l_max:
            raise RuntimeError(
                f"density not resolved at maximum refinement level {l_max}")
        frontier = []
        for b in splits:
            kids = bld.split(b)
            for c in kids:
                sample(c)
            frontier.extend(kids)

    def fill(parent, kids):
        if refill == "evaluate":
            for c in kids:
                sample(c)
        else:
            for c in kids:
                values[c] = _interp_child(bld, parent, c, coeffs[parent], basis)
                coeffs[c] = vals_to_coeffs(values[c], basis, dim)

    bld.balance(on_split=fill)
    tree = bld.finalize()
    values = {b: values[b] for b in range(tree.n_boxes) if tree.is_leaf[b]}
    coeffs = {b: coeffs[b] for b in values}
    return tree, values, coeffs


def _builder_grid_points(bld, b, basis):
    c = bld.center(b)
    s = bld.root_side / 2 ** bld.level[b]
    axes = [c[k] + 0.5 * s * basis.nodes for k in range(bld.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def _interp_child(bld, parent, child, parent_coeffs, basis):
    """Evaluate the parent's Legendre expansion on a child's grid."""
    from .poly1d import legendre_values

    dim = bld.dim
    bit = bld.coords[child] - 2 * bld.coords[parent]
    out = parent_coeffs
    for ax in range(dim):
        local = 0.5 * basis.nodes + (bit[ax] - 0.5) / 2.0 * 2.0 / 2.0
        local = 0.5 * (basis.nodes + 2.0 * bit[ax] - 1.0) / 1.0
        P = legendre_values(basis.k - 1, local * 0.5)
        out = np.moveaxis(np.tensordot(P.T, out, axes=([1], [ax])), 0, ax)
    return out


def balance_tree(tree, on_split=None):
    """Re-balance an existing tree; returns a new Tree (input unchanged)."""
    bld = _Builder(tree.dim, tree.root_center, tree.root_side, tree.periodic)
    mapping = {0: 0}
    order = np.argsort(tree.level, kind="stable")
    for b in order:
        if b == 0:
            continue
    # rebuild by replaying splits level by level
    for l in range(tree.n_levels):
        for b in tree.boxes_at_level(l):
            if not tree.is_leaf[b]:
                kids = bld.split(mapping[b])
                for c, kid in zip(tree.children[b], kids):
                    mapping[c] = kid
    bld.balance(on_split=on_split)
    return bld.finalize()
