"""GF(2) homology of the truncated compact manifold.

Each ideal tetrahedron is truncated at its four corners, producing an honest
compact pair: per tetrahedron one 3-cell, four hexagonal lateral 2-cells (the
truncated faces), four corner triangles on the boundary, the truncated edges,
the corner-triangle edges (one per face and corner, lying on the boundary)
and twelve boundary vertices.  Face pairings identify lateral cells; the
corner cells assemble into the cusp tori.

All linear algebra is over GF(2) with rows stored as Python int bitsets.
"""

from .tricore import TriangulationError


class GF2ChainComplex:
    """Boundary matrices for the truncated manifold.

    cells[k] is the list of k-cell names; boundary[k][i] is the bitset over
    (k-1)-cells of the boundary of cells[k][i]; on_boundary[k][i] flags cells
    in the boundary subcomplex.
    """

    def __init__(self, cells, boundary, on_boundary):
        self.cells = cells
        self.boundary = boundary
        self.on_boundary = on_boundary

    def counts(self):
        return tuple(len(c) for c in self.cells)

    def euler_characteristic(self):
        return sum((-1) ** k * len(c) for k, c in enumerate(self.cells))

    def verify_boundary_squared(self):
        for k in (2, 3):
            for mask in self.boundary[k]:
                acc = 0
                m = mask
                while m:
                    low = m & -m
                    acc ^= self.boundary[k - 1][low.bit_length() - 1]
                    m ^= low
                if acc:
                    raise TriangulationError("boundary of boundary is non-zero")
        return True

    def boundary_flags_closed(self):
        """The boundary subcomplex is closed under the boundary maps."""
        for k in (1, 2, 3):
            for i, mask in enumerate(self.boundary[k]):
                if self.on_boundary[k][i]:
                    m = mask
                    while m:
                        low = m & -m
                        if not self.on_boundary[k - 1][low.bit_length() - 1]:
                            return False
                        m ^= low
        return True


def _index_map(items):
    return {item: i for i, item in enumerate(items)}


def truncated_complex(T):
    """Build the GF(2) chain complex of the truncated manifold."""
    n = T.n
    glue = T.gluing

    # --- identify cells by orbit tracing -----------------------------------
    # vertices: (t, v, sorted edge pair at v); identified through the two
    # faces containing the edge.  Tuples only, so union-find ordering is total.
    def edge_key(a, b):
        return (a, b) if a < b else (b, a)

    def vert_reps():
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for t in range(n):
            for v in range(4):
                for w in range(4):
                    if w != v:
                        parent[(t, v, edge_key(v, w))] = (t, v, edge_key(v, w))
        for t in range(n):
            for f in range(4):
                p = glue.gluings[t][f]
                u = glue.neighbors[t][f]
                for v in range(4):
                    if v == f:
                        continue
                    for w in range(4):
                        if w in (v, f):
                            continue
                        union((t, v, edge_key(v, w)),
                              (u, p[v], edge_key(p[v], p[w])))
        classes = {}
        for key in parent:
            classes.setdefault(find(key), []).append(key)
        reps = sorted(classes)
        lookup = {}
        for rep in reps:
            for key in classes[rep]:
                lookup[key] = rep
        return reps, lookup

    vreps, vlook = vert_reps()

    # cusp edges: (t, v, f) with v != f, identified in pairs through face f
    cusp_lookup = {}
    cusp_reps = []
    for t in range(n):
        for v in range(4):
            for f in range(4):
                if f == v or (t, v, f) in cusp_lookup:
                    continue
                p = glue.gluings[t][f]
                u = glue.neighbors[t][f]
                mate = (u, p[v], p[f])
                rep = min((t, v, f), mate)
                cusp_lookup[(t, v, f)] = rep
                cusp_lookup[mate] = rep
                cusp_reps.append(rep)
    cusp_reps.sort()

    # long edges: one per edge class of T
    long_lookup = {}
    for e, cls in enumerate(T.edge_classes):
        for inc in cls.incidences:
            a, b = inc.pair
            long_lookup[(inc.tet, edge_key(a, b))] = e

    # 2-cells: hexagons (face classes) and corner triangles (t, v)
    corner_tris = [(t, v) for t in range(n) for v in range(4)]

    nvert = len(vreps)
    ncusp = len(cusp_reps)
    nlong = len(T.edge_classes)
    nhex = len(T.face_classes)
    ntri = len(corner_tris)

    vidx = _index_map(vreps)
    cidx = _index_map(cusp_reps)
    tri_idx = _index_map(corner_tris)

    cells0 = ["v%s" % (rep,) for rep in vreps]
    cells1 = (["edge%d" % e for e in range(nlong)]
              + ["cusp%s" % (rep,) for rep in cusp_reps])
    cells2 = (["hex%d" % i for i in range(nhex)]
              + ["tri%s" % (c,) for c in corner_tris])
    cells3 = ["tet%d" % t for t in range(n)]

    def cusp_col(t, v, f):
        return nlong + cidx[cusp_lookup[(t, v, f)]]

    # boundary of 1-cells
    b1 = []
    for e, cls in enumerate(T.edge_classes):
        (t, a), (t2, b) = cls.endpoints()
        edge = edge_key(*cls.incidences[0].pair)
        mask = 0
        mask ^= 1 << vidx[vlook[(t, a, edge)]]
        mask ^= 1 << vidx[vlook[(t2, b, edge)]]
        b1.append(mask)
    for rep in cusp_reps:
        t, v, f = rep
        others = [w for w in range(4) if w not in (v, f)]
        mask = 0
        for w in others:
            mask ^= 1 << vidx[vlook[(t, v, edge_key(v, w))]]
        b1.append(mask)

    # boundary of 2-cells
    b2 = []
    for (t, f), _ in T.face_classes:
        verts = [v for v in range(4) if v != f]
        mask = 0
        for i in range(3):
            a, b = verts[i], verts[(i + 1) % 3]
            mask ^= 1 << long_lookup[(t, edge_key(a, b))]
        for v in verts:
            mask ^= 1 << cusp_col(t, v, f)
        b2.append(mask)
    for (t, v) in corner_tris:
        mask = 0
        for f in range(4):
            if f != v:
                mask ^= 1 << cusp_col(t, v, f)
        b2.append(mask)

    # boundary of 3-cells
    b3 = []
    for t in range(n):
        mask = 0
        for f in range(4):
            mask ^= 1 << T.face_class_of(t, f)
        for v in range(4):
            mask ^= 1 << (nhex + tri_idx[(t, v)])
        b3.append(mask)

    on0 = [True] * nvert
    on1 = [False] * nlong + [True] * ncusp
    on2 = [False] * nhex + [True] * ntri
    on3 = [False] * n

    cx = GF2ChainComplex(
        cells=[cells0, cells1, cells2, cells3],
        boundary=[[0] * nvert, b1, b2, b3],
        on_boundary=[on0, on1, on2, on3],
    )
    cx.verify_boundary_squared()
    assert cx.boundary_flags_closed()
    return cx


# --- GF(2) linear algebra on bitsets ---------------------------------------

def gf2_rank(vectors):
    basis = []
    rank = 0
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
            rank += 1
    return rank


class _Eliminator:
    """Keeps an echelon basis; reduce() returns the residue of a vector."""

    def __init__(self):
        self.pivots = {}  # pivot bit -> vector

    def reduce(self, v):
        while v:
            top = v.bit_length() - 1
            if top in self.pivots:
                v ^= self.pivots[top]
            else:
                return v, top
        return 0, None

    def add(self, v):
        v, top = self.reduce(v)
        if v:
            self.pivots[top] = v
            return True
        return False

    @property
    def rank(self):
        return len(self.pivots)


def gf2_kernel_basis(vectors):
    """Kernel of the map sending unit vector i to vectors[i]."""
    elim = _Eliminator()
    combos = {}
    kernel = []
    for i, v in enumerate(vectors):
        combo = 1 << i
        while v:
            top = v.bit_length() - 1
            if top in elim.pivots:
                v ^= elim.pivots[top]
                combo ^= combos[top]
            else:
                break
        if v:
            top = v.bit_length() - 1
            elim.pivots[top] = v
            combos[top] = combo
        else:
            kernel.append(combo)
    return kernel


def gf2_in_span(target, vectors):
    elim = _Eliminator()
    for v in vectors:
        elim.add(v)
    residue, _ = elim.reduce(target)
    return residue == 0


def _restrict(mask, keep_positions):
    """Project a bitset onto the listed positions (new consecutive bits)."""
    out = 0
    for new, old in enumerate(keep_positions):
        if mask >> old & 1:
            out |= 1 << new
    return out


def h1_gate(T):
    """Rank data of H1(compact manifold) -> H1(relative to boundary).

    Returns {"zero_map": bool, "h1_rank": k, "image_rank": r} where k is the
    GF(2) rank of absolute H1 and r the rank of the induced map into the
    relative group.  The map vanishing is the hypothesis under which the
    pipeline's triangulations always admit strict angle structures.
    """
    cx = truncated_complex(T)
    b1, b2 = cx.boundary[1], cx.boundary[2]
    cycles = gf2_kernel_basis(b1)
    h1_rank = len(cycles) - gf2_rank(b2)

    nlong = sum(1 for flag in cx.on_boundary[1] if not flag)
    keep1 = [i for i, flag in enumerate(cx.on_boundary[1]) if not flag]
    rel_boundaries = [_restrict(b2[i], keep1)
                      for i, flag in enumerate(cx.on_boundary[2]) if not flag]

    elim = _Eliminator()
    for v in rel_boundaries:
        elim.add(v)
    base_rank = elim.rank
    for z in cycles:
        elim.add(_restrict(z, keep1))
    image_rank = elim.rank - base_rank
    return {"zero_map": image_rank == 0, "h1_rank": h1_rank,
            "image_rank": image_rank}


def boundary_complex_h1_rank(cx):
    """GF(2) rank of H1 of the boundary subcomplex (2 per torus cusp)."""
    keep0 = [i for i, f in enumerate(cx.on_boundary[0]) if f]
    keep1 = [i for i, f in enumerate(cx.on_boundary[1]) if f]
    keep2 = [i for i, f in enumerate(cx.on_boundary[2]) if f]
    pos1 = {old: new for new, old in enumerate(keep1)}
    b1 = [_restrict(cx.boundary[1][i], keep0) for i in keep1]
    b2 = []
    for i in keep2:
        mask = cx.boundary[2][i]
        out = 0
        m = mask
        while m:
            low = m & -m
            j = low.bit_length() - 1
            out ^= 1 << pos1[j]
            m ^= low
        b2.append(out)
    cycles = gf2_kernel_basis(b1)
    return len(cycles) - gf2_rank(b2)


def peripheral_image_rank(T):
    """Rank of H1(boundary) -> H1(compact manifold), for exactness checks."""
    cx = truncated_complex(T)
    b1, b2 = cx.boundary[1], cx.boundary[2]
    # absolute boundaries
    elim = _Eliminator()
    for v in b2:
        elim.add(v)
    base = elim.rank
    # peripheral cycles: cycles of the boundary subcomplex, included into C1
    keep0 = [i for i, f in enumerate(cx.on_boundary[0]) if f]
    keep1 = [i for i, f in enumerate(cx.on_boundary[1]) if f]
    sub_b1 = [_restrict(cx.boundary[1][i], keep0) for i in keep1]
    sub_cycles = gf2_kernel_basis(sub_b1)
    for z in sub_cycles:
        incl = 0
        m = z
        while m:
            low = m & -m
            incl ^= 1 << keep1[low.bit_length() - 1]
            m ^= low
        elim.add(incl)
    return elim.rank - base


def relative_class_report(T, face_class_sets):
    """Combine face classes (mod 2) into a relative 2-chain and decide
    whether it is a non-trivial class in relative H2.

    ``face_class_sets`` is an iterable of face-class index collections; their
    symmetric difference is the candidate chain.  Returns the surviving face
    set and the verdict.
    """
    cx = truncated_complex(T)
    nhex = sum(1 for f in cx.on_boundary[2] if not f)
    chain = 0
    for faces in face_class_sets:
        for i in faces:
            chain ^= 1 << i
    faces = {i for i in range(nhex) if chain >> i & 1}

    keep1 = [i for i, f in enumerate(cx.on_boundary[1]) if not f]
    rel_bd = _restrict(
        _xor_all(cx.boundary[2][i] for i in faces), keep1) if faces else 0
    if rel_bd:
        raise TriangulationError("face set is not a relative 2-cycle")
    keep2 = [i for i, f in enumerate(cx.on_boundary[2]) if not f]
    pos2 = {old: new for new, old in enumerate(keep2)}
    rel_b3 = [_restrict(mask, keep2) for mask in cx.boundary[3]]
    target = _restrict(chain, keep2)
    nontrivial = bool(faces) and not gf2_in_span(target, rel_b3)
    return {"faces": faces, "nontrivial": nontrivial}


def _xor_all(masks):
    acc = 0
    for m in masks:
        acc ^= m
    return acc


def obstruction_class(T, pillow_views, S=None):
    """The mod-2 obstruction chain: the union of pillow faces whose top and
    bottom vertex-link patterns differ by an odd alternation.

    ``pillow_views`` is an iterable of (face_class_indices, lam) pairs, one
    per pillow, as produced by ppp.pillow_views (or hand-annotated for
    triangulations whose pillow structure is implicit).  ``S`` is carried for
    reporting only; the lambdas were computed from it by the caller.
    """
    odd = [tuple(faces) for faces, lam in pillow_views if lam % 2 == 1]
    return relative_class_report(T, odd)
