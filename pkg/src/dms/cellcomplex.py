"""Finite regular cell complexes as face posets.

A complex stores dimension-graded cells, each knowing its codimension-1
faces by id.  Ids are plain strings, unique within a complex, and every
derived construction (subdivision, tube, inner copy) suffixes ids
deterministically so that outputs are byte-reproducible.

Vertices are `v{i}`, edges `e{i}-{j}` with i < j and triangles
`t{i}-{j}-{k}` sorted, when built from a facet list.  Polygonal 2-cells
(cyclic edge boundary of length >= 3) are first class; simplices are not
assumed anywhere outside `build_simplicial`.
"""

from dataclasses import dataclass

from .errors import (
    BadCellBoundary,
    BadDimensionDrop,
    BoundaryNotCycle,
    DegenerateFacet,
    DuplicateFacet,
    MissingFace,
    NonPseudomanifold,
    NotClosedSurface,
    UnknownCell,
)

TAG_ORIGINAL = "original"
TAG_TUBE = "tube"
TAG_INNER = "inner-copy"
TAG_CONE = "cone"
TAG_BISECTION = "bisection"


@dataclass(frozen=True)
class Cell:
    id: str
    dim: int
    boundary: frozenset
    tag: str = TAG_ORIGINAL

    def __repr__(self):
        return "Cell(%r, dim=%d)" % (self.id, self.dim)


@dataclass(frozen=True)
class SurfaceInfo:
    genus: int | None
    orientable: bool


class Complex:
    """Immutable face-poset complex.

    Construction validates grading, closure and (for 2-cells) that the
    edge boundary is a single cycle in which no vertex repeats.  Flags
    for the pseudomanifold and closed-surface properties are computed
    once; surgeries build new complexes rather than mutating.
    """

    def __init__(self, cells):
        # cells: iterable of Cell
        self.cells = {}
        for cell in cells:
            if cell.id in self.cells:
                raise DuplicateFacet("duplicate cell id %r" % cell.id)
            self.cells[cell.id] = cell
        if not self.cells:
            raise MissingFace("empty complex")
        self.top_dim = max(c.dim for c in self.cells.values())
        self._validate_grading()
        self._cofaces = self._build_cofaces()
        self._cycles = {}
        for cid, cell in sorted(self.cells.items()):
            if cell.dim == 2:
                self._cycles[cid] = self._edge_cycle(cell)
        self.is_pseudomanifold = self._check_pseudomanifold()
        self.is_closed_surface = self._check_closed_surface()
        self._closures = {}
        self._orientable = None

    # ---- validation ----------------------------------------------------

    def _validate_grading(self):
        for cid, cell in self.cells.items():
            if cell.dim < 0:
                raise BadDimensionDrop("cell %r has negative dimension" % cid)
            if cell.dim == 0 and cell.boundary:
                raise BadDimensionDrop("vertex %r has a boundary" % cid)
            for fid in cell.boundary:
                face = self.cells.get(fid)
                if face is None:
                    raise MissingFace("cell %r lists missing face %r" % (cid, fid))
                if face.dim != cell.dim - 1:
                    raise BadDimensionDrop(
                        "cell %r (dim %d) lists face %r (dim %d)"
                        % (cid, cell.dim, fid, face.dim))
            if cell.dim == 1 and len(cell.boundary) != 2:
                raise BadCellBoundary(
                    "edge %r must have exactly 2 endpoints" % cid)
            if cell.dim >= 1 and not cell.boundary:
                raise BadCellBoundary("cell %r of dim %d has empty boundary"
                                      % (cid, cell.dim))

    def _build_cofaces(self):
        cof = {cid: [] for cid in self.cells}
        for cid in sorted(self.cells):
            for fid in sorted(self.cells[cid].boundary):
                cof[fid].append(cid)
        return {cid: tuple(ids) for cid, ids in cof.items()}

    def _edge_cycle(self, cell):
        """Boundary of a 2-cell as an alternating cyclic walk
        [v0, e0, v1, e1, ...]; raises if the edges are not one cycle."""
        edges = sorted(cell.boundary)
        if len(edges) < 3:
            raise BoundaryNotCycle(
                "2-cell %r has %d boundary edges" % (cell.id, len(edges)))
        at_vertex = {}
        for eid in edges:
            for vid in self.cells[eid].boundary:
                at_vertex.setdefault(vid, []).append(eid)
        for vid, eids in at_vertex.items():
            if len(eids) != 2:
                raise BoundaryNotCycle(
                    "2-cell %r: vertex %r lies on %d of its edges"
                    % (cell.id, vid, len(eids)))
        # walk the cycle starting from the smallest vertex
        start = min(at_vertex)
        first = min(at_vertex[start])
        walk = [start, first]
        prev_v, cur_e = start, first
        while True:
            nxt = [v for v in self.cells[cur_e].boundary if v != prev_v]
            if len(nxt) != 1:
                raise BoundaryNotCycle("2-cell %r: bad edge %r" % (cell.id, cur_e))
            v = nxt[0]
            if v == start:
                break
            options = [e for e in at_vertex[v] if e != cur_e]
            walk.append(v)
            walk.append(options[0])
            prev_v, cur_e = v, options[0]
        if len(walk) != 2 * len(edges):
            raise BoundaryNotCycle(
                "2-cell %r boundary is not a single cycle" % cell.id)
        return tuple(walk)

    def _check_pseudomanifold(self):
        n = self.top_dim
        if n == 0:
            return False
        for cid, cell in self.cells.items():
            if cell.dim == n - 1 and len(self._cofaces[cid]) != 2:
                return False
        return True

    def _check_closed_surface(self):
        if self.top_dim != 2 or not self.is_pseudomanifold:
            return False
        if not self.is_connected():
            return False
        for cid, cell in self.cells.items():
            if cell.dim == 0 and not self._vertex_link_is_cycle(cid):
                return False
        return True

    def _vertex_link_is_cycle(self, vid):
        edges_at = [e for e in self._cofaces[vid] if self.cells[e].dim == 1]
        if not edges_at:
            return False
        # each 2-cell at vid pairs up exactly two of its edges at vid
        adj = {e: [] for e in edges_at}
        for e in edges_at:
            for t in self._cofaces[e]:
                local = [x for x in self.cells[t].boundary
                         if vid in self.cells[x].boundary]
                if len(local) != 2:
                    return False
                other = local[0] if local[1] == e else local[1]
                adj[e].append(other)
        for e, nbrs in adj.items():
            if len(nbrs) != 2:
                return False
        seen = {edges_at[0]}
        frontier = [edges_at[0]]
        while frontier:
            e = frontier.pop()
            for o in adj[e]:
                if o not in seen:
                    seen.add(o)
                    frontier.append(o)
        return len(seen) == len(edges_at)

    # ---- queries --------------------------------------------------------

    def __contains__(self, cid):
        return cid in self.cells

    def __eq__(self, other):
        # tags are provenance annotation, not part of the face poset
        if not isinstance(other, Complex):
            return NotImplemented
        if self.cells.keys() != other.cells.keys():
            return False
        return all(c.dim == other.cells[cid].dim
                   and c.boundary == other.cells[cid].boundary
                   for cid, c in self.cells.items())

    def cell(self, cid):
        cell = self.cells.get(cid)
        if cell is None:
            raise UnknownCell(cid)
        return cell

    def dim(self, cid):
        return self.cell(cid).dim

    def boundary(self, cid):
        return self.cell(cid).boundary

    def cofaces(self, cid):
        if cid not in self.cells:
            raise UnknownCell(cid)
        return self._cofaces[cid]

    def cells_of_dim(self, p):
        return sorted(cid for cid, c in self.cells.items() if c.dim == p)

    def counts(self):
        out = [0] * (self.top_dim + 1)
        for c in self.cells.values():
            out[c.dim] += 1
        return tuple(out)

    def closure(self, cid):
        """All faces of cid, transitively, including cid itself."""
        cached = self._closures.get(cid)
        if cached is not None:
            return cached
        out = {cid}
        frontier = [cid]
        while frontier:
            cur = frontier.pop()
            for fid in self.cells[cur].boundary:
                if fid not in out:
                    out.add(fid)
                    frontier.append(fid)
        out = frozenset(out)
        self._closures[cid] = out
        return out

    def closed_star(self, cid):
        """cid, every cell having cid in its closure, and their faces."""
        star = {cid}
        frontier = [cid]
        while frontier:
            cur = frontier.pop()
            for cof in self._cofaces[cur]:
                if cof not in star:
                    star.add(cof)
                    frontier.append(cof)
        out = set()
        for sid in star:
            out |= self.closure(sid)
        return frozenset(out)

    def boundary_cycle(self, cid):
        """Alternating [v0, e0, v1, e1, ...] walk around a 2-cell."""
        if self.dim(cid) != 2:
            raise UnknownCell("%r is not a 2-cell" % cid)
        return self._cycles[cid]

    def vertices_of(self, cid):
        return sorted(x for x in self.closure(cid) if self.cells[x].dim == 0)

    def is_connected(self):
        ids = sorted(self.cells)
        seen = {ids[0]}
        frontier = [ids[0]]
        while frontier:
            cur = frontier.pop()
            for nxt in list(self.cells[cur].boundary) + list(self._cofaces[cur]):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return len(seen) == len(self.cells)

    def records(self):
        """Emit (id, dim, sorted boundary ids) records; build_poset of the
        result reproduces this complex exactly."""
        return [(cid, cell.dim, sorted(cell.boundary))
                for cid, cell in sorted(self.cells.items())]

    def replace_cells(self, remove=(), add=()):
        """New complex with `remove` ids dropped and `add` cells inserted."""
        cells = {cid: c for cid, c in self.cells.items() if cid not in set(remove)}
        for cell in add:
            cells[cell.id] = cell
        return Complex(cells.values())


# ---- constructors --------------------------------------------------------


def vertex_id(i):
    return "v%d" % i


def edge_id(i, j):
    i, j = sorted((i, j))
    return "e%d-%d" % (i, j)


def triangle_id(i, j, k):
    i, j, k = sorted((i, j, k))
    return "t%d-%d-%d" % (i, j, k)


def build_simplicial(triangles, closed=True):
    """Simplicial 2-complex from a list of vertex triples.

    Vertex indices must be non-negative integers; facets must be
    non-degenerate and pairwise distinct up to permutation.  With
    closed=True every edge must lie in exactly two triangles, otherwise
    NonPseudomanifold is raised.
    """
    seen = set()
    for tri in triangles:
        if len(tri) != 3 or len(set(tri)) != 3:
            raise DegenerateFacet("degenerate facet %r" % (tuple(tri),))
        if any((not isinstance(v, int)) or v < 0 for v in tri):
            raise DegenerateFacet("bad vertex index in %r" % (tuple(tri),))
        key = tuple(sorted(tri))
        if key in seen:
            raise DuplicateFacet("duplicate facet %r" % (key,))
        seen.add(key)
    if not seen:
        raise MissingFace("no facets")

    cells = {}
    edge_use = {}
    for tri in sorted(seen):
        i, j, k = tri
        for v in tri:
            vid = vertex_id(v)
            cells[vid] = Cell(vid, 0, frozenset())
        eids = []
        for a, b in ((i, j), (i, k), (j, k)):
            eid = edge_id(a, b)
            cells[eid] = Cell(eid, 1, frozenset({vertex_id(a), vertex_id(b)}))
            edge_use[eid] = edge_use.get(eid, 0) + 1
            eids.append(eid)
        tid = triangle_id(i, j, k)
        cells[tid] = Cell(tid, 2, frozenset(eids))
    if closed:
        for eid, n in sorted(edge_use.items()):
            if n != 2:
                raise NonPseudomanifold(
                    "edge %s lies in %d facets, expected 2" % (eid, n))
    return Complex(cells.values())


def build_poset(records):
    """Complex from explicit (id, dim, boundary ids) records."""
    cells = []
    for cid, dim, bnd in records:
        cells.append(Cell(str(cid), int(dim), frozenset(str(b) for b in bnd)))
    return Complex(cells)


def euler_characteristic(K):
    chi = 0
    for cell in K.cells.values():
        chi += 1 if cell.dim % 2 == 0 else -1
    return chi


def local_neighborhood(K, cid):
    """(star, link) of a cell, both as id -> Cell sub-poset mappings.

    star is the closed star: all cofaces of cid together with their
    faces.  link is the part of the closed star whose closure avoids
    cid; on a simplicial neighborhood this is the usual link.
    """
    if cid not in K:
        raise UnknownCell(cid)
    star_ids = K.closed_star(cid)
    star = {sid: K.cells[sid] for sid in sorted(star_ids)}
    link = {sid: K.cells[sid] for sid in sorted(star_ids)
            if cid not in K.closure(sid)}
    return star, link


def _orientation_ok(K):
    """Propagate coherent 2-cell orientations; False on conflict."""
    direction = {}  # 2-cell id -> dict edge -> (from_vertex, to_vertex)
    for tid in K.cells_of_dim(2):
        walk = K.boundary_cycle(tid)
        m = len(walk) // 2
        direction[tid] = {
            walk[2 * i + 1]: (walk[2 * i], walk[(2 * i + 2) % (2 * m)])
            for i in range(m)}
    sign = {}
    for start in K.cells_of_dim(2):
        if start in sign:
            continue
        sign[start] = 1
        frontier = [start]
        while frontier:
            t = frontier.pop()
            for eid in K.cells[t].boundary:
                for other in K.cofaces(eid):
                    if other == t:
                        continue
                    # coherent: shared edge traversed in opposite senses
                    same = direction[t][eid] == direction[other][eid]
                    want = -sign[t] if same else sign[t]
                    if other not in sign:
                        sign[other] = want
                        frontier.append(other)
                    elif sign[other] != want:
                        return False
    return True


def verify_closed_surface(K):
    """Check K is a closed surface; return SurfaceInfo(genus, orientable).

    Raises NotClosedSurface naming an offending cell.  Non-orientability
    is reported, not raised; genus is None in that case.
    """
    if K.top_dim != 2:
        raise NotClosedSurface("top dimension is %d" % K.top_dim)
    if not K.is_connected():
        raise NotClosedSurface("complex is not connected")
    for eid in K.cells_of_dim(1):
        if len(K.cofaces(eid)) != 2:
            raise NotClosedSurface("edge %s has %d cofaces"
                                   % (eid, len(K.cofaces(eid))))
    for vid in K.cells_of_dim(0):
        if not K._vertex_link_is_cycle(vid):
            raise NotClosedSurface("vertex %s link is not a single cycle" % vid)
    orientable = _orientation_ok(K)
    if not orientable:
        return SurfaceInfo(genus=None, orientable=False)
    chi = euler_characteristic(K)
    if chi % 2 != 0 or chi > 2:
        raise NotClosedSurface("impossible Euler characteristic %d" % chi)
    return SurfaceInfo(genus=(2 - chi) // 2, orientable=True)
