"""Ideal triangulations of cusped 3-manifolds.

A triangulation is given by a gluing table: ``n`` tetrahedra with vertices
labelled 0..3, and for each face (face ``f`` is the one opposite vertex ``f``)
a neighbouring tetrahedron together with a permutation of {0,1,2,3} mapping
vertex labels of this tetrahedron to vertex labels of the neighbour.  From the
table we derive the edge classes (with the cyclic sequence of incidences and
of quadrilateral types facing each edge), the vertex classes (cusps), the face
classes, and a global orientation.

Only orientable triangulations in which every vertex link is a torus are
accepted; these are the inputs all the deciders in this package work with.
"""

import json
from dataclasses import dataclass


class TriangulationError(ValueError):
    pass


class NonInvolutiveGluing(TriangulationError):
    pass


class UngluedFace(TriangulationError):
    pass


class NonOrientable(TriangulationError):
    pass


class VertexLinkNotTorus(TriangulationError):
    pass


# ---------------------------------------------------------------------------
# permutations of {0,1,2,3}, stored as 4-tuples (image of 0, ..., image of 3)

def perm_from_string(s):
    """Parse a 4-digit string like "3120" into a permutation tuple."""
    p = tuple(int(c) for c in s)
    if len(p) != 4 or sorted(p) != [0, 1, 2, 3]:
        raise TriangulationError("bad permutation string %r" % (s,))
    return p


def perm_to_string(p):
    return "".join(str(i) for i in p)


def perm_inverse(p):
    inv = [0] * 4
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def perm_sign(p):
    sign = 1
    for i in range(4):
        for j in range(i + 1, 4):
            if p[i] > p[j]:
                sign = -sign
    return sign


# Quadrilateral axes: axis a is the quad type disjoint from (facing) the pair
# of opposite edges listed in PAIRS_OF_AXIS[a].
PAIRS_OF_AXIS = (
    (frozenset((0, 1)), frozenset((2, 3))),
    (frozenset((0, 2)), frozenset((1, 3))),
    (frozenset((0, 3)), frozenset((1, 2))),
)

AXIS_OF_EDGE = {}
for _a, _pair in enumerate(PAIRS_OF_AXIS):
    for _e in _pair:
        AXIS_OF_EDGE[_e] = _a


def axis_of_edge(a, b):
    """Axis of the quad type facing the edge (a, b): the pair {ab, cd}."""
    return AXIS_OF_EDGE[frozenset((a, b))]


def axis_of_corner(v, f):
    """Axis of the quad type whose normal arc cuts off vertex v on face f.

    This is the quad in the pair-partition grouping v with f (corners on the
    four edges other than (v,f) and its opposite).
    """
    return AXIS_OF_EDGE[frozenset((v, f))]


@dataclass(frozen=True, order=True)
class QuadType:
    """One of the 3n normal quadrilateral types: (tetrahedron, axis)."""
    tet: int
    axis: int

    @property
    def edge_pair(self):
        return PAIRS_OF_AXIS[self.axis]

    def __repr__(self):
        return "q(%d;%d)" % (self.tet, self.axis)


@dataclass(frozen=True)
class EdgeIncidence:
    """One appearance of a tetrahedron around an edge.

    ``pair`` is the ordered vertex pair spanning the edge; travelling around
    the edge we enter the tetrahedron through ``entry_face`` and leave through
    ``exit_face``.
    """
    tet: int
    pair: tuple
    entry_face: int
    exit_face: int

    @property
    def quad(self):
        return QuadType(self.tet, axis_of_edge(*self.pair))


class EdgeClass:
    """Cyclic orbit of tetrahedron edges glued around one edge of M."""

    def __init__(self, incidences):
        self.incidences = tuple(incidences)
        self.degree = len(self.incidences)
        self.quad_sequence = tuple(inc.quad for inc in self.incidences)

    def pairs(self):
        return tuple((inc.tet, inc.pair) for inc in self.incidences)

    def endpoints(self):
        """The two ends of the edge, as corner representatives (tet, vertex)."""
        inc = self.incidences[0]
        return (inc.tet, inc.pair[0]), (inc.tet, inc.pair[1])

    def __repr__(self):
        return "EdgeClass(degree=%d, %s)" % (
            self.degree,
            ", ".join("%d (%d%d)" % (t, p[0], p[1]) for t, p in self.pairs()),
        )


class GluingTable:
    """Face pairing data: neighbours[t][f] and gluings[t][f] for each face."""

    def __init__(self, neighbors, gluings):
        self.n = len(neighbors)
        self.neighbors = [list(row) for row in neighbors]
        self.gluings = [list(row) for row in gluings]
        if len(gluings) != self.n:
            raise TriangulationError("neighbor and gluing tables disagree in length")
        for t in range(self.n):
            if len(self.neighbors[t]) != 4 or len(self.gluings[t]) != 4:
                raise TriangulationError("tetrahedron %d does not have 4 faces" % t)

    @classmethod
    def from_json_obj(cls, obj):
        tets = obj["tetrahedra"]
        neighbors = []
        gluings = []
        for rec in tets:
            neighbors.append(list(rec["neighbors"]))
            row = []
            for s in rec["gluings"]:
                row.append(None if s is None else perm_from_string(s))
            gluings.append(row)
        return cls(neighbors, gluings)

    def to_json_obj(self):
        tets = []
        for t in range(self.n):
            tets.append({
                "neighbors": list(self.neighbors[t]),
                "gluings": [None if p is None else perm_to_string(p)
                            for p in self.gluings[t]],
            })
        return {"tetrahedra": tets}

    def check_complete(self):
        for t in range(self.n):
            for f in range(4):
                if self.neighbors[t][f] is None or self.gluings[t][f] is None:
                    raise UngluedFace("face %d of tetrahedron %d is not glued" % (f, t))
                u = self.neighbors[t][f]
                if not (0 <= u < self.n):
                    raise TriangulationError(
                        "face %d of tetrahedron %d glued to missing tetrahedron %d"
                        % (f, t, u))

    def check_involutive(self):
        for t in range(self.n):
            for f in range(4):
                u = self.neighbors[t][f]
                p = self.gluings[t][f]
                g = p[f]  # face of u we arrive at
                if self.neighbors[u][g] != t or self.gluings[u][g] != perm_inverse(p):
                    raise NonInvolutiveGluing(
                        "gluing of face %d of tetrahedron %d has no matching inverse"
                        % (f, t))
                if u == t and g == f:
                    if p == (0, 1, 2, 3):
                        raise NonInvolutiveGluing(
                            "face %d of tetrahedron %d is glued to itself pointwise"
                            % (f, t))


class Triangulation:
    """A validated ideal triangulation with all derived combinatorics.

    Immutable after construction.  Edge classes are sorted by their minimal
    (tet, vertex pair) incidence so that all derived output is byte-stable.
    """

    def __init__(self, gluing, edge_classes, vertex_classes, face_classes,
                 orientation):
        self.gluing = gluing
        self.edge_classes = tuple(edge_classes)
        self.vertex_classes = tuple(vertex_classes)
        self.face_classes = tuple(face_classes)
        self.orientation = tuple(orientation)
        self._edge_index = {}
        for e, cls in enumerate(self.edge_classes):
            for pos, inc in enumerate(cls.incidences):
                self._edge_index[(inc.tet, inc.pair)] = (e, pos)
                rev = (inc.pair[1], inc.pair[0])
                self._edge_index[(inc.tet, rev)] = (e, pos)
        self._vertex_index = {}
        for c, cls in enumerate(self.vertex_classes):
            for corner in cls:
                self._vertex_index[corner] = c
        self._face_index = {}
        for i, (side_a, side_b) in enumerate(self.face_classes):
            self._face_index[side_a] = i
            self._face_index[side_b] = i

    @property
    def n(self):
        return self.gluing.n

    @property
    def num_cusps(self):
        return len(self.vertex_classes)

    def edge_of(self, tet, a, b):
        """Index of the edge class containing edge (a, b) of the tetrahedron."""
        return self._edge_index[(tet, (a, b))][0]

    def vertex_class_of(self, tet, v):
        return self._vertex_index[(tet, v)]

    def face_class_of(self, tet, f):
        return self._face_index[(tet, f)]

    def edge_degrees(self):
        return tuple(cls.degree for cls in self.edge_classes)

    def quad_types(self):
        return [QuadType(t, a) for t in range(self.n) for a in range(3)]

    def to_json_obj(self):
        return self.gluing.to_json_obj()


def _trace_edge(gluing, start_tet, start_pair):
    """Walk around an edge, recording each incidence until the orbit closes.

    From (tet, (a,b)) we exit through one of the two faces containing the
    edge; the gluing maps the ordered pair forward and the next exit face is
    the remaining vertex label.  Raises NonOrientable if the orbit returns
    with the pair reversed, which cannot happen in an oriented triangulation.
    """
    a, b = start_pair
    faces = [f for f in range(4) if f not in (a, b)]
    exit_face = min(faces)
    state = (start_tet, (a, b), exit_face)
    incidences = []
    seen = set()
    while True:
        tet, pair, f = state
        if (tet, pair, f) in seen:
            raise TriangulationError("edge orbit failed to close")  # pragma: no cover
        seen.add((tet, pair, f))
        p = gluing.gluings[tet][f]
        u = gluing.neighbors[tet][f]
        entry = p[f]
        new_pair = (p[pair[0]], p[pair[1]])
        next_exit = next(v for v in range(4) if v not in (new_pair[0], new_pair[1], entry))
        other_entry = next(v for v in range(4) if v not in pair and v != f)
        incidences.append(EdgeIncidence(tet, pair, other_entry, f))
        if (u, new_pair) == (start_tet, start_pair):
            break
        if (u, (new_pair[1], new_pair[0])) == (start_tet, start_pair):
            raise NonOrientable(
                "edge (%d%d) of tetrahedron %d is glued to itself reversed"
                % (start_pair[0], start_pair[1], start_tet))
        state = (u, new_pair, next_exit)
    return incidences


def _orientation(gluing):
    """Per-tetrahedron signs making every face pairing orientation-reversing."""
    n = gluing.n
    signs = [0] * n
    for start in range(n):
        if signs[start]:
            continue
        signs[start] = 1
        stack = [start]
        while stack:
            t = stack.pop()
            for f in range(4):
                u = gluing.neighbors[t][f]
                want = -signs[t] * perm_sign(gluing.gluings[t][f])
                if signs[u] == 0:
                    signs[u] = want
                    stack.append(u)
                elif signs[u] != want:
                    raise NonOrientable(
                        "no consistent orientation: conflict at face %d of tetrahedron %d"
                        % (f, t))
    return signs


def build_triangulation(gluing):
    """Derive all combinatorial classes from a complete gluing table.

    Raises NonInvolutiveGluing, UngluedFace, NonOrientable or
    VertexLinkNotTorus, naming the offending cell.
    """
    gluing.check_complete()
    gluing.check_involutive()
    orientation = _orientation(gluing)

    n = gluing.n
    # edge classes, sorted by minimal incidence because we scan in order
    edge_classes = []
    seen_slots = set()
    for t in range(n):
        for a in range(4):
            for b in range(a + 1, 4):
                if (t, (a, b)) in seen_slots or (t, (b, a)) in seen_slots:
                    continue
                incidences = _trace_edge(gluing, t, (a, b))
                for inc in incidences:
                    seen_slots.add((inc.tet, inc.pair))
                edge_classes.append(EdgeClass(incidences))
    if sum(c.degree for c in edge_classes) != 6 * n:
        raise TriangulationError("edge orbits do not cover all %d slots" % (6 * n))

    # vertex classes: orbits of corners (t, v) under the face pairings
    parent = {(t, v): (t, v) for t in range(n) for v in range(4)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for t in range(n):
        for f in range(4):
            p = gluing.gluings[t][f]
            u = gluing.neighbors[t][f]
            for v in range(4):
                if v != f:
                    union((t, v), (u, p[v]))
    groups = {}
    for corner in sorted(parent):
        groups.setdefault(find(corner), []).append(corner)
    vertex_classes = [frozenset(g) for _, g in sorted(groups.items())]

    # face classes: each unordered pair {(t,f),(u,g)} of glued faces
    face_classes = []
    seen_faces = set()
    for t in range(n):
        for f in range(4):
            if (t, f) in seen_faces:
                continue
            u = gluing.neighbors[t][f]
            g = gluing.gluings[t][f][f]
            seen_faces.add((t, f))
            seen_faces.add((u, g))
            face_classes.append(((t, f), (u, g)))
    if len(face_classes) != 2 * n:
        raise TriangulationError("expected %d face classes, got %d"
                                 % (2 * n, len(face_classes)))

    # vertex links: each must be a torus.  The link of a vertex class c is a
    # closed surface with one triangle per corner, 3k/2 edges and one vertex
    # per edge end at c, so 2*chi = 2*ends - k.
    corner_class = {}
    for idx, cls in enumerate(vertex_classes):
        for corner in cls:
            corner_class[corner] = idx
    ends = [0] * len(vertex_classes)
    for cls in edge_classes:
        for corner in cls.endpoints():
            ends[corner_class[corner]] += 1
    for idx, cls in enumerate(vertex_classes):
        if 2 * ends[idx] - len(cls) != 0:
            raise VertexLinkNotTorus(
                "link of vertex class %d has Euler characteristic %s"
                % (idx, (2 * ends[idx] - len(cls)) / 2.0))

    return Triangulation(gluing, edge_classes, vertex_classes, face_classes,
                         orientation)


def canonical_cycle(seq):
    """Lexicographically least rotation or reflection of a cyclic sequence."""
    items = list(seq)
    if not items:
        return tuple()
    best = None
    for source in (items, items[::-1]):
        for r in range(len(source)):
            cand = tuple(source[r:] + source[:r])
            if best is None or cand < best:
                best = cand
    return best


def quad_sequence(T, e):
    """Quad types facing edge e, canonicalized up to rotation and reversal."""
    if not (0 <= e < len(T.edge_classes)):
        raise IndexError("edge index %d out of range" % e)
    return canonical_cycle(T.edge_classes[e].quad_sequence)


def load_triangulation(path):
    with open(path) as fh:
        obj = json.load(fh)
    return build_triangulation(GluingTable.from_json_obj(obj))


def save_triangulation(T, path):
    with open(path, "w") as fh:
        json.dump(T.to_json_obj(), fh, indent=1)
        fh.write("\n")
