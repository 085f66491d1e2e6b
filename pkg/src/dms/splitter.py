"""Decomposition of a perfect gradient field on a closed oriented surface.

Pipeline: pick the critical edges for each summand by function value,
reverse-trace the 2-paths from the critical facet to the chosen high
edges (the carved core region), repair the region boundary until it is
a single circle whose cells are matched along the circle or away from
the region, split, and cap both pieces with cones.

The single repair primitive is corridor excavation: a marked sliver of
the region (a pinch corner at a wedge vertex, or the neighborhood of an
interior chain that the boundary points into) is cut off by bisections
so that every new boundary cell is matched with a cell outside the
region.  Critical-cell counts never change.
"""

from dataclasses import dataclass, field

from .cellcomplex import Complex, Cell, TAG_CONE, euler_characteristic, \
    verify_closed_surface
from .errors import (
    BoundaryCriticalPresent,
    InconsistentField,
    NoFlankingCells,
    NonOrientableInput,
    NotPerfectInput,
    NotSeparating,
    PathEscapes,
    StartIsCritical,
    UnbalancedBoundaryCriticals,
    WrongCriticalCount,
)
from .morsefield import (
    MorseFunction,
    VectorField,
    critical_cells,
    induced_field,
    is_perfect,
    make_injective,
    synthesize_function,
    trace_2path,
    validate_field,
)
from .surgery import bisect_2cell, bisect_edge, separate_critical_cells


@dataclass
class CoreRegion:
    facets: set
    path_edges: set
    high_edges: set
    critical_facet: str
    paths: list = field(default_factory=list)

    def cells(self):
        return frozenset(self.facets) | frozenset(self.path_edges) \
            | frozenset(self.high_edges)


@dataclass(frozen=True)
class StrayChain:
    edges: tuple
    interior_vertices: tuple
    anchors: tuple            # chain vertices lying on the boundary curve
    spans_components: bool


@dataclass(frozen=True)
class BoundaryGraph:
    edges: frozenset
    degree: dict
    components: tuple         # frozensets of edge ids
    wedge_vertices: tuple     # degree >= 4
    arcs: tuple               # StrayChain entries with >= 2 anchors
    connecting_circles: tuple  # components passing >= 2 wedge vertices
    classification: str       # Circle | SingleWedge | WedgesWithArcs |
                               # WedgesWithConnectingCircles


@dataclass
class SplitResult:
    circle: tuple             # alternating v, e, v, e, ... cycle
    min_complex: Complex
    min_field: VectorField
    max_complex: Complex
    max_field: VectorField


@dataclass
class DecomposeResult:
    m1_complex: Complex
    m1_field: VectorField
    m1_function: MorseFunction
    m2_complex: Complex
    m2_field: VectorField
    m2_function: MorseFunction
    circle: tuple
    report: dict


# --- region bookkeeping ------------------------------------------------------


def _boundary_and_interior(K, facets):
    count = {}
    for t in facets:
        for e in K.boundary(t):
            count[e] = count.get(e, 0) + 1
    boundary = {e for e, n in count.items() if n == 1}
    interior = {e for e, n in count.items() if n == 2}
    return boundary, interior


def _edge_graph_components(K, edges):
    adj = {}
    for e in edges:
        a, b = sorted(K.boundary(e))
        adj.setdefault(a, []).append(e)
        adj.setdefault(b, []).append(e)
    comps = []
    unseen = set(edges)
    while unseen:
        start = min(unseen)
        comp = {start}
        unseen.discard(start)
        frontier = [start]
        while frontier:
            e = frontier.pop()
            for v in K.boundary(e):
                for o in adj[v]:
                    if o in unseen:
                        unseen.discard(o)
                        comp.add(o)
                        frontier.append(o)
        comps.append(frozenset(comp))
    return tuple(comps)


# --- spec operations ---------------------------------------------------------


def select_split_edges(K, f, g1, g2):
    """Critical edges sorted by function value: the lowest 2*g1 belong to
    the summand with the critical vertex, the highest 2*g2 to the one
    with the critical facet."""
    V = induced_field(K, f)
    crit = critical_cells(V, K)
    edges = list(crit.cells.get(1, ()))
    if g1 + g2 < 1 or len(edges) != 2 * (g1 + g2):
        raise WrongCriticalCount(
            "%d critical edges, need %d" % (len(edges), 2 * (g1 + g2)))
    edges.sort(key=lambda e: (f[e], e))
    return tuple(edges[:2 * g1]), tuple(edges[len(edges) - 2 * g2:])


def carve_core(K, V, high_edges):
    """Union of the reverse-traced 2-paths from both cofaces of every
    high edge, plus the critical facet and the high edges themselves."""
    counts = critical_cells(V, K)
    if len(counts.cells.get(2, ())) != 1:
        raise PathEscapes("expected a unique critical 2-cell")
    crit2 = counts.cells[2][0]
    facets = {crit2}
    path_edges = set()
    paths = []
    for e in sorted(high_edges):
        cofaces = sorted(K.cofaces(e))
        if len(cofaces) != 2:
            raise PathEscapes("high edge %s has %d cofaces" % (e, len(cofaces)))
        for t in cofaces:
            if t == crit2:
                raise PathEscapes(
                    "high edge %s touches the critical facet" % e)
            try:
                path = trace_2path(K, V, t, crit2)
            except (InconsistentField, StartIsCritical) as err:
                raise PathEscapes(str(err))
            paths.append(path)
            facets.update(path.steps[1::2])
            path_edges.update(path.steps[0::2])
    return CoreRegion(facets=facets, path_edges=path_edges,
                      high_edges=set(high_edges), critical_facet=crit2,
                      paths=paths)


def classify_boundary(K, region):
    boundary, interior = _boundary_and_interior(K, region.facets)
    degree = {}
    for e in boundary:
        for v in K.boundary(e):
            degree[v] = degree.get(v, 0) + 1
    for v, d in degree.items():
        if d % 2 != 0:
            raise InconsistentField("odd boundary degree at %s" % v)
    components = _edge_graph_components(K, boundary)
    wedges = tuple(sorted(v for v, d in degree.items() if d >= 4))

    stray_edges = interior - set(region.path_edges) - set(region.high_edges)
    arcs = []
    if stray_edges:
        on_curve = set(degree)
        for comp in _edge_graph_components(K, stray_edges):
            verts = set()
            for e in comp:
                verts |= set(K.boundary(e))
            anchors = tuple(sorted(verts & on_curve))
            if len(anchors) < 2:
                continue
            comp_of_anchor = set()
            for i, bc in enumerate(components):
                bverts = set()
                for e in bc:
                    bverts |= set(K.boundary(e))
                if bverts & set(anchors):
                    comp_of_anchor.add(i)
            arcs.append(StrayChain(
                edges=tuple(sorted(comp)),
                interior_vertices=tuple(sorted(verts - on_curve)),
                anchors=anchors,
                spans_components=len(comp_of_anchor) > 1))
    arcs = tuple(arcs)

    connecting = []
    for comp in components:
        cverts = set()
        for e in comp:
            cverts |= set(K.boundary(e))
        if len(cverts & set(wedges)) >= 2:
            connecting.append(comp)
    connecting = tuple(connecting)

    if len(components) == 1 and not wedges and not arcs:
        cls = "Circle"
    elif arcs or len(components) > 1:
        cls = "WedgesWithArcs"
    elif len(wedges) == 1:
        cls = "SingleWedge"
    else:
        cls = "WedgesWithConnectingCircles"
    return BoundaryGraph(edges=frozenset(boundary), degree=degree,
                         components=components, wedge_vertices=wedges,
                         arcs=arcs, connecting_circles=connecting,
                         classification=cls)


# --- the excavation engine ---------------------------------------------------


def _apply_renames(region, renames):
    def follow(x):
        while x in renames:
            x = renames[x]
        return x

    region.path_edges = {follow(e) for e in region.path_edges}
    region.high_edges = {follow(e) for e in region.high_edges}
    region.critical_facet = follow(region.critical_facet)
    region.facets = {follow(t) for t in region.facets}


def _runs_on_cycle(cycle, marked):
    """Maximal contiguous runs of marked cells on a cyclic walk."""
    n = len(cycle)
    flags = [cell in marked for cell in cycle]
    if all(flags):
        raise NoFlankingCells("entire cycle marked")
    if not any(flags):
        return []
    runs = []
    i = 0
    while flags[i]:
        i = (i + 1) % n
    start = i
    run = []
    for k in range(n):
        j = (start + k) % n
        if flags[j]:
            run.append(j)
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)
    return runs


def _excavate(K, V, region, marked):
    """Cut the marked sliver of every listed facet out of the region.

    marked maps facet id -> cells of its boundary cycle to expel.  Cuts
    land on existing boundary vertices or on fresh midpoints of the
    crossed interior edges, so every new boundary cell ends up matched
    with a cell outside the region.
    """
    marked = {t: set(cs) for t, cs in marked.items()}
    renames = {}

    # interior edges joining two marked cells must gain a midpoint first
    guard = 0
    while True:
        guard += 1
        if guard > 10 * len(K.cells) + 50:
            raise NoFlankingCells("excavation pre-pass did not converge")
        todo = None
        for t in sorted(marked):
            cycle = K.boundary_cycle(t)
            mk = marked[t]
            for i in range(1, len(cycle), 2):
                e = cycle[i]
                if e in mk:
                    continue
                a, b = sorted(K.boundary(e))
                if a in mk and b in mk:
                    todo = e
                    break
            if todo:
                break
        if not todo:
            break
        K, V, rec = bisect_edge(K, V, todo)
        renames.update(rec.replacements)
        _apply_renames(region, rec.replacements)

    boundary, interior = _boundary_and_interior(K, region.facets)

    # rungs: unmarked interior edges flanking a marked cell; bisect each
    # once, anchored away from the marked endpoint
    rung_mid = {}
    for t in sorted(marked):
        cycle = K.boundary_cycle(t)
        mk = marked[t]
        n = len(cycle)
        for i in range(1, n, 2):
            e = cycle[i]
            if e in mk or e in rung_mid or e not in interior:
                continue
            ends = sorted(K.boundary(e))
            marked_ends = [x for x in ends if x in mk]
            if len(marked_ends) != 1:
                continue
            partner = V.partner_map().get(e)
            if partner == marked_ends[0]:
                raise InconsistentField(
                    "rung %s is matched with its expelled endpoint" % e)
            K, V, rec = bisect_edge(K, V, e, anchor=[x for x in ends
                                                     if x not in mk][0])
            renames.update(rec.replacements)
            _apply_renames(region, rec.replacements)
            w, e1, e2 = rec.new_cells
            rung_mid[e] = (w, e2)  # e2 is the expelled-side half
    # fold the expelled halves into the marked sets of their facets
    for e, (w, e2) in rung_mid.items():
        for t in marked:
            if t in K.cells and e2 in K.cells[t].boundary:
                marked[t].add(e2)

    boundary, interior = _boundary_and_interior(K, region.facets)

    # cut the corners facet by facet
    for orig in sorted(marked):
        pieces = [orig]
        guard = 0
        while True:
            guard += 1
            if guard > 4 * len(K.cells) + 20:
                raise NoFlankingCells("corner cutting did not converge")
            target = None
            for p in pieces:
                cyc = K.boundary_cycle(p)
                mk = {c for c in cyc if c in marked[orig]}
                if mk:
                    target = (p, list(cyc), mk)
                    break
            if target is None:
                break
            p, cyc, mk = target
            runs = _runs_on_cycle(cyc, mk)
            run = runs[0]
            n = len(cyc)
            corner = {cyc[i] for i in run}
            before = (run[0] - 1) % n
            after = (run[-1] + 1) % n
            boundary_vertices = set()
            for e in boundary:
                boundary_vertices |= set(K.boundary(e))

            def cut_point(idx, step):
                # step +1 walks forward, -1 backward from the run
                cell = cyc[idx]
                if idx % 2 == 0:
                    nxt_edge = cyc[(idx + step) % n]
                    if cell not in boundary_vertices or nxt_edge in interior:
                        return idx
                    # anchor on the curve: expel the flank edge as well
                    marked[orig].update((cell, nxt_edge))
                    corner.update((cell, nxt_edge))
                    return (idx + 2 * step) % n
                # an edge: boundary flanks are expelled, cut past them
                if cell in boundary:
                    marked[orig].add(cell)
                    corner.add(cell)
                    return (idx + step) % n
                raise NoFlankingCells(
                    "unexpected interior flank %r at %r" % (cell, p))

            ia = cut_point(before, -1)
            ib = cut_point(after, +1)
            if cyc[ia] in marked[orig] or cyc[ib] in marked[orig] \
                    or ia % 2 == 1 or ib % 2 == 1:
                # extension landed on marked cells; redo run detection
                continue
            u, w = cyc[ia], cyc[ib]
            if u == w:
                raise NoFlankingCells("corner swallows polygon %r" % p)
            joining = [cyc[i] for i in range(1, n, 2)
                       if K.boundary(cyc[i]) == frozenset({u, w})]
            if joining:
                g = joining[0]
                K, V, rec = bisect_edge(K, V, g)
                renames.update(rec.replacements)
                _apply_renames(region, rec.replacements)
                if g in marked[orig]:
                    marked[orig].update(rec.new_cells)
                boundary, interior = _boundary_and_interior(K, region.facets)
                continue
            # argument order: the inheriting piece must avoid this corner
            cyc_now = K.boundary_cycle(p)
            m2 = len(cyc_now)
            pos = {c: i for i, c in enumerate(cyc_now)}
            i, arc_hits = pos[u], False
            while i != pos[w]:
                if cyc_now[i] in corner:
                    arc_hits = True
                i = (i + 1) % m2
            a1, a2 = (w, u) if arc_hits else (u, w)
            K, V, rec = bisect_2cell(K, V, p, a1, a2)
            renames.update(rec.replacements)
            _apply_renames(region, rec.replacements)
            d, c1, c2 = rec.new_cells
            expelled = c2 if any(c in corner
                                 for c in K.boundary_cycle(c2)) else c1
            kept = c1 if expelled == c2 else c2
            if region.critical_facet == expelled:
                raise InconsistentField("critical facet expelled")
            region.facets.discard(p)
            region.facets.discard(expelled)
            region.facets.add(kept)
            pieces = [x for x in pieces if x != p] + [kept]
            boundary, interior = _boundary_and_interior(K, region.facets)
    return K, V, region


def _stray_closure(K, V, region, seeds):
    """Grow a set of interior stray edges along the vertex arrows leaving
    it, so the excavated corridor carries its own matching out."""
    pm = V.partner_map()
    boundary, interior = _boundary_and_interior(K, region.facets)
    bverts = set()
    for e in boundary:
        bverts |= set(K.boundary(e))
    z_edges = set()
    z_verts = set()
    frontier = list(seeds)
    while frontier:
        e = frontier.pop()
        if e in z_edges:
            continue
        z_edges.add(e)
        for x in K.boundary(e):
            if x in bverts or x in z_verts:
                continue
            z_verts.add(x)
            p = pm.get(x)
            if p is not None and K.dim(p) == 1 and p in interior \
                    and p not in region.path_edges \
                    and p not in region.high_edges:
                frontier.append(p)
    return z_edges, z_verts


def _excavate_stray(K, V, region, seeds):
    z_edges, z_verts = _stray_closure(K, V, region, seeds)
    marked = {}
    zcells = z_edges | z_verts
    for t in sorted(region.facets):
        hit = zcells & set(K.boundary_cycle(t))
        if hit:
            marked[t] = hit
    if not marked:
        raise InconsistentField("stray %r touches no region facet" % seeds)
    return _excavate(K, V, region, marked)


def resolve_arc(K, V, region, bg, arc):
    """Push an interior chain out of the region (Case 2): excavate the
    corridor around it so the two flanking cut chains become boundary
    and the chain itself lies outside."""
    return _excavate_stray(K, V, region, arc.edges)


def _sectors_at(K, region, v):
    """Maximal fans of region facets in the rotation around v."""
    edges_at = sorted(e for e in K.cofaces(v) if K.dim(e) == 1)
    seq = []
    e = edges_at[0]
    t = sorted(K.cofaces(e))[0]
    start = (e, t)
    while True:
        seq.append((e, t))
        locals_ = [x for x in K.boundary(t)
                   if v in K.boundary(x) and x != e]
        e = locals_[0]
        ts = [x for x in K.cofaces(e) if x != t]
        t = ts[0]
        if (e, t) == start:
            break
    facet_ring = [t for _, t in seq]
    flags = [t in region.facets for t in facet_ring]
    if all(flags) or not any(flags):
        return [facet_ring] if all(flags) else []
    n = len(facet_ring)
    i = 0
    while flags[i]:
        i = (i + 1) % n
    sectors = []
    run = []
    for k in range(n):
        j = (i + k) % n
        if flags[j]:
            run.append(facet_ring[j])
        elif run:
            sectors.append(run)
            run = []
    if run:
        sectors.append(run)
    return sectors


def resolve_wedge(K, V, region, bg, v):
    """Reroute the boundary around a wedge vertex (Case 1): shave the
    corner at v off every region sector except one, so exactly one
    strand still passes through v."""
    sectors = _sectors_at(K, region, v)
    if len(sectors) < 2:
        return K, V, region
    keep = min(range(len(sectors)), key=lambda i: min(sectors[i]))
    marked = {}
    for i, sec in enumerate(sectors):
        if i == keep:
            continue
        for t in sec:
            marked.setdefault(t, set()).add(v)
    return _excavate(K, V, region, marked)


def _push_vertex_off(K, V, region, v):
    marked = {t: {v} for t in sorted(region.facets)
              if v in set(K.boundary_cycle(t))}
    if not marked:
        return K, V, region
    return _excavate(K, V, region, marked)


# --- driver ------------------------------------------------------------------


def _inward_violations(K, V, region, bg):
    pm = V.partner_map()
    _, interior = _boundary_and_interior(K, region.facets)
    bverts = set()
    for e in bg.edges:
        bverts |= set(K.boundary(e))
    out = []
    for x in sorted(bverts):
        p = pm.get(x)
        if p is not None and K.dim(p) == 1 and p in interior \
                and p not in region.path_edges and p not in region.high_edges:
            out.append((x, p))
    return out


def _expel_foreign_criticals(K, V, region, low_edges):
    counts = critical_cells(V, K)
    v0 = counts.cells[0][0]
    if any(v0 in set(K.boundary_cycle(t)) for t in region.facets):
        K, V, region = _push_vertex_off(K, V, region, v0)
    for e in sorted(low_edges):
        touching = [t for t in K.cofaces(e) if t in region.facets]
        if touching:
            K, V, region = _excavate_stray(K, V, region, [e])
    return K, V, region


def _complement_components(K, region):
    bedges, _ = _boundary_and_interior(K, region.facets)
    adj = {t: [] for t in K.cells_of_dim(2) if t not in region.facets}
    for e in K.cells_of_dim(1):
        if e in bedges:
            continue
        ts = [t for t in K.cofaces(e) if t in adj]
        if len(ts) == 2:
            adj[ts[0]].append(ts[1])
            adj[ts[1]].append(ts[0])
    comps = []
    unseen = set(adj)
    while unseen:
        start = min(unseen)
        comp = {start}
        unseen.discard(start)
        frontier = [start]
        while frontier:
            t = frontier.pop()
            for o in adj[t]:
                if o in unseen:
                    unseen.discard(o)
                    comp.add(o)
                    frontier.append(o)
        comps.append(comp)
    return comps


def _absorb_pockets(K, V, region):
    """Complement components that do not hold the critical vertex are
    enclosed pockets; fold them into the region side when they carry no
    critical cell.  Returns True if anything was absorbed."""
    pm = V.partner_map()
    comps = _complement_components(K, region)
    if len(comps) <= 1:
        return False
    def has_crit_vertex(comp):
        for t in comp:
            for x in K.closure(t):
                if K.dim(x) == 0 and x not in pm:
                    return True
        return False
    main = [comp for comp in comps if has_crit_vertex(comp)]
    if len(main) != 1:
        raise NotSeparating("critical vertex not localized to one side")
    absorbed = False
    for comp in comps:
        if comp is main[0]:
            continue
        cells = set()
        for t in comp:
            cells |= K.closure(t)
        stuck = sorted(c for c in cells if c not in pm)
        if stuck:
            raise NotSeparating(
                "enclosed pocket holds critical cells %s" % stuck[:3])
        region.facets |= comp
        absorbed = True
    return absorbed


def find_separating_circle(K, f, g1, g2):
    """Drive the boundary repairs until the carved region is bounded by a
    single circle with no arrows pointing into it; returns the final
    (complex, field, circle walk, region)."""
    info = verify_closed_surface(K)
    if not info.orientable:
        raise NonOrientableInput("decompose needs an orientable surface")
    if info.genus != g1 + g2:
        raise WrongCriticalCount(
            "surface genus %s but g1+g2=%d" % (info.genus, g1 + g2))
    V = induced_field(K, f)
    if not is_perfect(K, V):
        raise NotPerfectInput(critical_cells(V, K).m)
    fi = make_injective(K, f)
    low, high = select_split_edges(K, fi, g1, g2)

    K, V, recs = separate_critical_cells(K, V)
    renames = {}
    for rec in recs:
        renames.update(rec.replacements)

    def follow(x):
        while x in renames:
            x = renames[x]
        return x

    low = [follow(e) for e in low]
    high = [follow(e) for e in high]
    region = carve_core(K, V, high)
    K, V, region = _expel_foreign_criticals(K, V, region, low)

    guard = 0
    while True:
        guard += 1
        if guard > 40 + 4 * len(K.cells):
            raise InconsistentField("boundary repair did not converge")
        bg = classify_boundary(K, region)
        viols = _inward_violations(K, V, region, bg)
        if viols:
            K, V, region = _excavate_stray(K, V, region, [viols[0][1]])
            continue
        if bg.arcs:
            K, V, region = resolve_arc(K, V, region, bg, bg.arcs[0])
            continue
        if bg.classification == "Circle":
            break
        # wedges: with connecting circles present, keep one designated
        # wedge (the largest id) for last
        wedges = list(bg.wedge_vertices)
        if not wedges:
            if len(bg.components) > 1 and _absorb_pockets(K, V, region):
                continue
            # Parallel tunnels can wrap a handle so that the carved core
            # (which any admissible cut must contain) already has several
            # disjoint boundary circles; no separating circle compatible
            # with this function exists.
            raise NotSeparating(
                "core region is bounded by %d disjoint circles with no "
                "connecting structure" % len(bg.components))
        if bg.connecting_circles and len(wedges) > 1:
            # keep one designated wedge for last while connecting circles
            # remain; any order terminates, this one follows the writeup
            designated = wedges[-1]
            target = [w for w in wedges if w != designated][0]
        else:
            target = wedges[0]
        K2, V2, region = resolve_wedge(K, V, region, bg, target)
        if K2 is K:
            raise InconsistentField("wedge resolution made no progress")
        K, V = K2, V2

    circle = _ordered_circle(K, bg.edges)
    _final_scan(K, V, region, circle)
    return K, V, circle, region


def _ordered_circle(K, edges):
    at_vertex = {}
    for eid in sorted(edges):
        for vid in K.boundary(eid):
            at_vertex.setdefault(vid, []).append(eid)
    for vid, eids in at_vertex.items():
        if len(eids) != 2:
            raise NotSeparating("boundary is not a single circle at %s" % vid)
    start = min(at_vertex)
    cur_e = min(at_vertex[start])
    walk = [start, cur_e]
    prev_v = start
    while True:
        nxt = [x for x in K.boundary(cur_e) if x != prev_v][0]
        if nxt == start:
            break
        cur_e = [x for x in at_vertex[nxt] if x != cur_e][0]
        walk.extend([nxt, cur_e])
        prev_v = nxt
    if len(walk) != 2 * len(edges):
        raise NotSeparating("boundary edges form more than one circle")
    return tuple(walk)


def _final_scan(K, V, region, circle):
    pm = V.partner_map()
    cverts = set(circle[0::2])
    cedges = set(circle[1::2])
    _, interior = _boundary_and_interior(K, region.facets)
    for x in sorted(cverts):
        p = pm.get(x)
        if p is None:
            raise InconsistentField("critical vertex %s on the circle" % x)
        if K.dim(p) == 1 and p in interior:
            raise InconsistentField("arrow from %s points into the region" % x)
        if K.dim(p) == 2 and p in region.facets:
            raise InconsistentField("vertex %s paired with a region facet" % x)
    for e in sorted(cedges):
        p = pm.get(e)
        if p is None:
            raise InconsistentField("critical edge %s on the circle" % e)
        if K.dim(p) == 2 and p in region.facets:
            raise InconsistentField("edge %s paired into the region" % e)


def split_along_circle(K, V, circle):
    """Cut the surface along the circle; each side keeps the circle cells
    (with their ids) and the pairs internal to it."""
    cedges = set(circle[1::2])
    adj = {}
    for t in K.cells_of_dim(2):
        adj[t] = []
    for e in K.cells_of_dim(1):
        if e in cedges:
            continue
        ts = [t for t in K.cofaces(e)]
        if len(ts) == 2:
            adj[ts[0]].append(ts[1])
            adj[ts[1]].append(ts[0])
    comps = []
    unseen = set(adj)
    while unseen:
        start = min(unseen)
        comp = {start}
        unseen.discard(start)
        frontier = [start]
        while frontier:
            t = frontier.pop()
            for o in adj[t]:
                if o in unseen:
                    unseen.discard(o)
                    comp.add(o)
                    frontier.append(o)
        comps.append(comp)
    if len(comps) != 2:
        raise NotSeparating("curve splits surface into %d parts" % len(comps))

    pm = V.partner_map()
    crit_vertex = [v for v in K.cells_of_dim(0) if v not in pm][0]

    def build(comp):
        ids = set()
        for t in comp:
            ids |= K.closure(t)
        piece = Complex([K.cells[c] for c in sorted(ids)])
        pairs = [(a, b) for a, b in V.pairs() if a in ids and b in ids]
        return piece, VectorField(pairs)

    a, b = build(comps[0]), build(comps[1])
    if crit_vertex in a[0].cells and crit_vertex not in b[0].cells:
        mn, mx = a, b
    elif crit_vertex in b[0].cells and crit_vertex not in a[0].cells:
        mn, mx = b, a
    else:
        raise NotSeparating("critical vertex lies on the cut")
    return SplitResult(circle=tuple(circle),
                       min_complex=mn[0], min_field=mn[1],
                       max_complex=mx[0], max_field=mx[1])


def _cone_cells(circle):
    apex = "cone:apex"
    verts = circle[0::2]
    edges = circle[1::2]
    cells = [Cell(apex, 0, frozenset(), TAG_CONE)]
    for v in verts:
        cells.append(Cell("cone:r:%s" % v, 1, frozenset({v, apex}), TAG_CONE))
    for i, e in enumerate(edges):
        va = verts[i]
        vb = verts[(i + 1) % len(verts)]
        cells.append(Cell("cone:t:%s" % e, 2,
                          frozenset({e, "cone:r:%s" % va, "cone:r:%s" % vb}),
                          TAG_CONE))
    return apex, cells


def cap_with_min_cone(piece, V, circle):
    """Cone over the circle with a critical apex: every boundary-critical
    cell is paired with its cone coface, and every pair along the circle
    gets the corresponding pair of cone cofaces."""
    verts = list(circle[0::2])
    edges = list(circle[1::2])
    pm = V.partner_map()
    apex, cells = _cone_cells(circle)
    capped = piece.replace_cells(add=cells)
    new_pairs = []
    used = set()
    for v in verts:
        p = pm.get(v)
        if p is None:
            new_pairs.append((v, "cone:r:%s" % v))
            used.add("cone:r:%s" % v)
        elif p in edges:
            new_pairs.append(("cone:r:%s" % v, "cone:t:%s" % p))
            used.update(("cone:r:%s" % v, "cone:t:%s" % p))
        else:
            raise UnbalancedBoundaryCriticals(
                "circle vertex %s paired into the piece via %s" % (v, p))
    for e in edges:
        p = pm.get(e)
        if p is None:
            new_pairs.append((e, "cone:t:%s" % e))
            used.add("cone:t:%s" % e)
        elif K_dim_safe(piece, p) != 0:
            raise UnbalancedBoundaryCriticals(
                "circle edge %s paired with %s" % (e, p))
    cone_ids = {c.id for c in cells} - {apex}
    if used != cone_ids:
        raise UnbalancedBoundaryCriticals(
            "cone cells left unmatched: %s" % sorted(cone_ids - used)[:4])
    V2 = VectorField(list(V.pairs()) + new_pairs)
    return capped, V2


def K_dim_safe(K, cid):
    return K.cells[cid].dim if cid in K.cells else -1


def cap_with_max_cone(piece, V, circle):
    """Cone over the circle carrying one new critical triangle: the fan
    pairing matches each radial edge with the next triangle and the apex
    with the remaining radial."""
    verts = list(circle[0::2])
    edges = list(circle[1::2])
    pm = V.partner_map()
    for c in verts + edges:
        if c not in pm:
            raise BoundaryCriticalPresent(c)
    apex, cells = _cone_cells(circle)
    capped = piece.replace_cells(add=cells)
    new_pairs = [(apex, "cone:r:%s" % verts[0])]
    for i in range(1, len(verts)):
        new_pairs.append(("cone:r:%s" % verts[i], "cone:t:%s" % edges[i]))
    # the triangle between r_0 and r_1 stays critical
    V2 = VectorField(list(V.pairs()) + new_pairs)
    return capped, V2


def decompose(K, f, g1, g2):
    """Full pipeline: find the separating circle, split, cap both sides,
    and synthesize functions for the capped fields."""
    K2, V2, circle, region = find_separating_circle(K, f, g1, g2)
    split = split_along_circle(K2, V2, circle)

    m1K, m1V = cap_with_max_cone(split.min_complex, split.min_field, circle)
    m2K, m2V = cap_with_min_cone(split.max_complex, split.max_field, circle)

    report = {
        "circleLength": len(circle) // 2,
        "chi": {"m1": euler_characteristic(m1K),
                "m2": euler_characteristic(m2K)},
        "chiPieces": {"min": euler_characteristic(split.min_complex),
                      "max": euler_characteristic(split.max_complex)},
        "morseCounts": {"m1": critical_cells(m1V, m1K).m,
                        "m2": critical_cells(m2V, m2K).m},
        "perfect": {"m1": is_perfect(m1K, m1V), "m2": is_perfect(m2K, m2V)},
        "functionsSynthesized": True,
    }
    for name, (cx, vf) in (("m1", (m1K, m1V)), ("m2", (m2K, m2V))):
        rep = validate_field(cx, vf)
        if not rep.ok:
            raise InconsistentField((name, rep.issues[:3]))
    m1f = synthesize_function(m1K, m1V)
    m2f = synthesize_function(m2K, m2V)
    return DecomposeResult(m1_complex=m1K, m1_field=m1V, m1_function=m1f,
                           m2_complex=m2K, m2_field=m2V, m2_function=m2f,
                           circle=tuple(circle), report=report)
