"""Normal surface coordinates: matching equations, Q-matching, vertical
classes, closed completions and arc patterns.

Vectors live in R^(7n), tetrahedron-major: four triangle coordinates (indexed
by the vertex they link) then three quad coordinates (indexed by axis) per
tetrahedron.  The matching equations say that triangle plus quad counts agree
across each glued face, one equation per face class and normal arc type.
"""

import math

from gmpy2 import mpq

from . import angles as angles_mod
from .angles import PreconditionViolated, VerticalQuadSet, find_angle_structure
from .ratlp import ZERO, ONE, LPProblem, RationalMatrixSystem, lp_solve
from .tricore import QuadType, axis_of_corner


class NoGeneralizedStructure(Exception):
    pass


def tri_col(t, v):
    return 7 * t + v


def quad_col(t, axis):
    return 7 * t + 4 + axis


class NormalVector:
    """A rational vector in normal surface coordinate space."""

    def __init__(self, T, coords):
        coords = list(coords)
        if len(coords) != 7 * T.n:
            raise ValueError("expected %d coordinates, got %d" % (7 * T.n, len(coords)))
        self.T = T
        self.coords = [mpq(c) for c in coords]

    @classmethod
    def zero(cls, T):
        return cls(T, [ZERO] * (7 * T.n))

    @classmethod
    def from_quads(cls, T, quads, tris=None):
        """Build from a {(tet, axis) or QuadType: value} mapping, triangles 0."""
        vec = [ZERO] * (7 * T.n)
        for key, v in quads.items():
            t, axis = (key.tet, key.axis) if isinstance(key, QuadType) else key
            vec[quad_col(t, axis)] = mpq(v)
        if tris:
            for (t, vert), v in tris.items():
                vec[tri_col(t, vert)] = mpq(v)
        return cls(T, vec)

    def tri(self, t, v):
        return self.coords[tri_col(t, v)]

    def quad(self, t, axis):
        return self.coords[quad_col(t, axis)]

    def quad_part(self):
        return {QuadType(t, a): self.quad(t, a)
                for t in range(self.T.n) for a in range(3)}

    def tri_total(self):
        return sum((self.tri(t, v) for t in range(self.T.n) for v in range(4)), ZERO)

    def quad_total(self):
        return sum((self.quad(t, a) for t in range(self.T.n) for a in range(3)), ZERO)

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coords)

    def is_nonnegative(self):
        return all(c >= 0 for c in self.coords)

    def is_admissible(self):
        if not self.is_nonnegative():
            return False
        for t in range(self.T.n):
            if sum(1 for a in range(3) if self.quad(t, a) != 0) > 1:
                return False
        return True

    def __add__(self, other):
        return NormalVector(self.T, [a + b for a, b in zip(self.coords, other.coords)])

    def __rmul__(self, k):
        return NormalVector(self.T, [mpq(k) * c for c in self.coords])

    def __eq__(self, other):
        return isinstance(other, NormalVector) and self.coords == other.coords

    def to_json_obj(self):
        return [int(c) if c.denominator == 1 else str(c) for c in self.coords]

    def __repr__(self):
        return "NormalVector(%s)" % (self.to_json_obj(),)


class NormalClass(NormalVector):
    """A normal vector with non-negative integer entries satisfying matching."""

    def __init__(self, T, coords):
        super().__init__(T, coords)
        if not self.is_integral() or not self.is_nonnegative():
            raise ValueError("normal classes have non-negative integer coordinates")


class SpunOnly:
    """Result marker: the quads admit no finite triangle completion."""

    def __repr__(self):
        return "SpunOnly"

    def __eq__(self, other):
        return isinstance(other, SpunOnly)


def as_vector(T, x):
    if isinstance(x, NormalVector):
        return x.coords
    return [mpq(c) for c in x]


def matching_system(T):
    """One equation per (face class, arc type): the triangle at the linking
    vertex plus the quad cutting that corner agree on the two sides."""
    rows = []
    names = []
    for t in range(T.n):
        for v in range(4):
            names.append("t(%d;%d)" % (t, v))
        for a in range(3):
            names.append("q(%d;%d)" % (t, a))
    for (t, f), (u, g) in T.face_classes:
        perm = T.gluing.gluings[t][f]
        for v in range(4):
            if v == f:
                continue
            row = [ZERO] * (7 * T.n)
            row[tri_col(t, v)] += ONE
            row[quad_col(t, axis_of_corner(v, f))] += ONE
            row[tri_col(u, perm[v])] -= ONE
            row[quad_col(u, axis_of_corner(perm[v], g))] -= ONE
            rows.append(row)
    return RationalMatrixSystem(rows, [ZERO] * len(rows), names)


def _quad_lookup(T, quads):
    if isinstance(quads, NormalVector):
        return lambda t, a: quads.quad(t, a)
    if isinstance(quads, dict):
        table = {}
        for key, v in quads.items():
            t, a = (key.tet, key.axis) if isinstance(key, QuadType) else key
            table[(t, a)] = mpq(v)
        return lambda t, a: table.get((t, a), ZERO)
    flat = [mpq(v) for v in quads]
    if len(flat) != 3 * T.n:
        raise ValueError("expected 3n quad coordinates")
    return lambda t, a: flat[3 * t + a]


def q_matching_residuals(T, quads):
    """Signed per-edge sums: around each edge the quad whose arc advances with
    the travel direction counts +1, the one that recedes counts -1, and the
    facing quad counts 0.  All residuals vanish exactly when the quads extend
    to a (possibly spun) normal solution."""
    q = _quad_lookup(T, quads)
    residuals = []
    for cls in T.edge_classes:
        total = ZERO
        for inc in cls.incidences:
            a = inc.pair[0]
            total += q(inc.tet, axis_of_corner(a, inc.exit_face))
            total -= q(inc.tet, axis_of_corner(a, inc.entry_face))
        residuals.append(total)
    return residuals


def q_matching_holds(T, quads):
    return all(r == 0 for r in q_matching_residuals(T, quads))


def complete_to_closed(T, quads):
    """Extend non-negative integral quads satisfying Q-matching to a closed
    normal class with the minimal vertex-linking padding, or report SpunOnly
    when no finite triangle completion exists.

    Triangle coordinates propagate across face classes: the matching equation
    fixes the difference of the two linking-triangle counts.  Consistency can
    only fail around a cusp cycle, which is exactly the spun case.
    """
    q = _quad_lookup(T, quads)
    for t in range(T.n):
        for a in range(3):
            v = q(t, a)
            if v < 0 or v.denominator != 1:
                raise PreconditionViolated("quad coordinates must be non-negative integers")
    if not q_matching_holds(T, quads):
        raise PreconditionViolated("quad coordinates fail the Q-matching equations")

    # difference constraints tri(u, perm[v]) - tri(t, v) = delta
    adj = {(t, v): [] for t in range(T.n) for v in range(4)}
    for (t, f), (u, g) in T.face_classes:
        perm = T.gluing.gluings[t][f]
        for v in range(4):
            if v == f:
                continue
            delta = q(t, axis_of_corner(v, f)) - q(u, axis_of_corner(perm[v], g))
            adj[(t, v)].append(((u, perm[v]), delta))
            adj[(u, perm[v])].append(((t, v), -delta))

    values = {}
    for cls in T.vertex_classes:
        seed = min(cls)
        values[seed] = ZERO
        stack = [seed]
        while stack:
            corner = stack.pop()
            for other, delta in adj[corner]:
                want = values[corner] + delta
                if other in values:
                    if values[other] != want:
                        return SpunOnly()
                else:
                    values[other] = want
                    stack.append(other)
        low = min(values[c] for c in cls)
        if low != 0:
            for c in cls:
                values[c] -= low

    vec = [ZERO] * (7 * T.n)
    for (t, v), val in values.items():
        vec[tri_col(t, v)] = val
    for t in range(T.n):
        for a in range(3):
            vec[quad_col(t, a)] = q(t, a)
    cls = NormalClass(T, vec)
    assert all(r == 0 for r in matching_system(T).residual(cls.coords))
    return cls


def vertex_link(T, cusp, multiplicity=1):
    """The peripheral surface at a cusp: every corner triangle of the vertex
    class with the given multiplicity, no quads."""
    vec = [ZERO] * (7 * T.n)
    for (t, v) in T.vertex_classes[cusp]:
        vec[tri_col(t, v)] = mpq(multiplicity)
    return NormalClass(T, vec)


def find_vertical_class(T, vertical):
    """A normal class supported on the vertical quads, if one exists.

    Solves the matching equations with all non-vertical quads fixed to zero,
    remaining quads non-negative summing to 1 and triangles unconstrained;
    a rational witness is scaled to integers and completed with minimal
    vertex-linking padding.
    """
    if isinstance(vertical, VerticalQuadSet):
        vertical.check_consistent()
        quadset = vertical.quads
    else:
        quadset = frozenset(vertical)

    n7 = 7 * T.n
    base = matching_system(T)
    sumrow = [ZERO] * n7
    for t in range(T.n):
        for a in range(3):
            sumrow[quad_col(t, a)] = ONE
    system = RationalMatrixSystem(base.rows + [sumrow], base.rhs + [ONE],
                                  base.var_names)
    lower = [None] * n7
    upper = [None] * n7
    for t in range(T.n):
        for a in range(3):
            col = quad_col(t, a)
            lower[col] = ZERO
            if QuadType(t, a) not in quadset:
                upper[col] = ZERO
    out = lp_solve(LPProblem(system, lower, upper))
    if out.status != "optimal":
        return None
    scale = 1
    for t in range(T.n):
        for a in range(3):
            d = int(out.x[quad_col(t, a)].denominator)
            scale = scale * d // math.gcd(scale, d)
    quads = {(t, a): out.x[quad_col(t, a)] * scale
             for t in range(T.n) for a in range(3)}
    result = complete_to_closed(T, quads)
    assert not isinstance(result, SpunOnly)
    return result


def strict_exists_dual(T, alpha=None):
    """Decide existence of a strict angle structure through the dual LP:
    maximize the formal Euler characteristic over normal solutions with
    non-negative quads summing to 1.  Strict structures exist exactly when
    that maximum is negative (or the region is empty)."""
    if alpha is None:
        alpha = find_angle_structure(T, "generalized")
        if alpha is None:
            raise NoGeneralizedStructure(
                "the angle equations are inconsistent for this triangulation")
    if any(v != 0 for v in alpha.residual(T)):
        raise PreconditionViolated("alpha is not a generalised angle structure")

    n7 = 7 * T.n
    base = matching_system(T)
    sumrow = [ZERO] * n7
    objective = [ZERO] * n7
    for t in range(T.n):
        for a in range(3):
            col = quad_col(t, a)
            sumrow[col] = ONE
            objective[col] = -alpha[QuadType(t, a)]
    system = RationalMatrixSystem(base.rows + [sumrow], base.rhs + [ONE],
                                  base.var_names)
    lower = [None] * n7
    upper = [None] * n7
    for t in range(T.n):
        for a in range(3):
            lower[quad_col(t, a)] = ZERO
    out = lp_solve(LPProblem(system, lower, upper, objective, "max"))
    if out.status == "infeasible":
        return True
    assert out.status == "optimal"
    return out.value < 0


class ArcPattern:
    """Arc multiplicities on the faces of the triangulation.

    Arcs on a face class are indexed by the linking vertex as labelled on the
    first side recorded in T.face_classes.
    """

    def __init__(self, T, counts):
        self.T = T
        self.counts = dict(counts)

    def at(self, face_class, vertex):
        return self.counts[(face_class, vertex)]

    def items(self):
        return sorted(self.counts.items())

    def __add__(self, other):
        return ArcPattern(self.T, {k: v + other.counts[k]
                                   for k, v in self.counts.items()})

    def __eq__(self, other):
        return isinstance(other, ArcPattern) and self.counts == other.counts


def arc_pattern(T, S):
    """Count the normal arcs S induces on each face class, by arc type."""
    counts = {}
    for i, ((t, f), (u, g)) in enumerate(T.face_classes):
        perm = T.gluing.gluings[t][f]
        for v in range(4):
            if v == f:
                continue
            a_side = S.tri(t, v) + S.quad(t, axis_of_corner(v, f))
            b_side = S.tri(u, perm[v]) + S.quad(u, axis_of_corner(perm[v], g))
            if a_side != b_side:
                raise PreconditionViolated("vector fails matching at face class %d" % i)
            counts[(i, v)] = a_side
    return ArcPattern(T, counts)
