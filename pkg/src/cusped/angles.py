"""Angle structures on ideal triangulations.

Angles are kept in units of pi throughout the exact code: every tetrahedron's
three quad angles sum to 1 and the angles around every edge sum to 2.  In
these units the defining equations are rational, so existence questions are
settled exactly by rational linear algebra and LP, never by thresholding a
float.  Radians appear only at the numeric boundary where angles are read off
complex tetrahedron shapes.
"""

import math
from fractions import Fraction

from gmpy2 import mpq

from .ratlp import (ZERO, ONE, InconsistentSystem, LPProblem,
                    RationalMatrixSystem, lp_solve, solve_linear)
from .tricore import QuadType


class PreconditionViolated(ValueError):
    pass


class NegativelyOriented(ValueError):
    def __init__(self, tet, shape):
        super().__init__("tetrahedron %d has negatively oriented shape %r" % (tet, shape))
        self.tet = tet


class EdgeEquationViolated(ValueError):
    """Shape parameters fail the consistency condition around an edge."""

    def __init__(self, violations):
        edge, residual = violations[0]
        super().__init__("edge %d fails its consistency equation (residual %g)"
                         % (edge, residual))
        self.violations = violations


class AngleAssignment:
    """A rational value per quad type, in units of pi."""

    def __init__(self, values):
        self.values = {q: mpq(v) for q, v in values.items()}

    def __getitem__(self, quad):
        return self.values[quad]

    def __iter__(self):
        return iter(sorted(self.values))

    @property
    def kind(self):
        if all(0 < v < 1 for v in self.values.values()):
            return "strict"
        if all(0 <= v <= 1 for v in self.values.values()):
            return "semi"
        return "generalized"

    @property
    def is_strict(self):
        return self.kind == "strict"

    @property
    def is_semi(self):
        return self.kind in ("strict", "semi")

    def vertical_quads(self):
        return frozenset(q for q, v in self.values.items() if v == 0)

    def as_vector(self, T):
        return [self.values[q] for q in T.quad_types()]

    def residual(self, T):
        system = angle_system(T)
        return system.residual(self.as_vector(T))

    def to_json_obj(self):
        return {"%d;%d" % (q.tet, q.axis): str(v)
                for q, v in sorted(self.values.items())}


class VerticalQuadSet:
    """Quad types assigned angle zero by a semi-angle structure.

    ``source`` records where the zero set came from: an exact AngleAssignment,
    a ShapeAngles reading, or pipeline provenance flags.
    """

    def __init__(self, quads, source=None):
        self.quads = frozenset(quads)
        self.source = source

    def __contains__(self, quad):
        return quad in self.quads

    def __iter__(self):
        return iter(sorted(self.quads))

    def __len__(self):
        return len(self.quads)

    def check_consistent(self):
        """Verify the stored structure is semi and has exactly these zeros."""
        src = self.source
        if src is None:
            return
        if isinstance(src, AngleAssignment):
            if not src.is_semi:
                raise PreconditionViolated("source assignment is not semi")
            if src.vertical_quads() != self.quads:
                raise PreconditionViolated("vertical set disagrees with stored angles")
        elif isinstance(src, ShapeAngles):
            if src.vertical_quads() != self.quads:
                raise PreconditionViolated("vertical set disagrees with shape angles")


def quad_index(T):
    """Column order for the 3n quad variables: tetrahedron-major by axis."""
    return {q: i for i, q in enumerate(T.quad_types())}


def angle_system(T):
    """The defining equations: one row per tetrahedron (sum 1) and one per
    edge class (sum 2, quads counted with multiplicity)."""
    index = quad_index(T)
    names = ["a(%d;%d)" % (q.tet, q.axis) for q in T.quad_types()]
    rows = []
    rhs = []
    for t in range(T.n):
        row = [ZERO] * len(index)
        for axis in range(3):
            row[index[QuadType(t, axis)]] = ONE
        rows.append(row)
        rhs.append(ONE)
    for cls in T.edge_classes:
        row = [ZERO] * len(index)
        for q in cls.quad_sequence:
            row[index[q]] += ONE
        rows.append(row)
        rhs.append(mpq(2))
    return RationalMatrixSystem(rows, rhs, names)


def _assignment_from_vector(T, x):
    return AngleAssignment({q: x[i] for q, i in quad_index(T).items()})


def find_angle_structure(T, kind="strict"):
    """Search for an angle structure of the requested kind; None if absent.

    generalized: exact solve of the defining equations.
    semi: LP feasibility with every angle in [0, 1].
    strict: maximize eps subject to eps <= angle <= 1 - eps; a witness is
    returned exactly when the optimal eps is positive.
    """
    if kind == "generalized":
        try:
            sol = solve_linear(angle_system(T))
        except InconsistentSystem:
            return None
        return _assignment_from_vector(T, sol.particular)

    if kind == "semi":
        system = angle_system(T)
        nq = system.num_vars
        problem = LPProblem(system, [ZERO] * nq, [ONE] * nq)
        out = lp_solve(problem)
        if out.status != "optimal":
            return None
        return _assignment_from_vector(T, out.x)

    if kind != "strict":
        raise ValueError("unknown kind %r" % (kind,))

    # variables: beta_q = alpha_q - eps  (>= 0), eps (free), s_q (>= 0)
    # rows: defining equations in beta/eps; caps beta_q + 2 eps + s_q = 1
    base = angle_system(T)
    nq = base.num_vars
    total = nq + 1 + nq
    rows = []
    rhs = []
    for row, b in zip(base.rows, base.rhs):
        newrow = list(row) + [sum(row, ZERO)] + [ZERO] * nq
        rows.append(newrow)
        rhs.append(b)
    for j in range(nq):
        newrow = [ZERO] * total
        newrow[j] = ONE
        newrow[nq] = mpq(2)
        newrow[nq + 1 + j] = ONE
        rows.append(newrow)
        rhs.append(ONE)
    lower = [ZERO] * nq + [None] + [ZERO] * nq
    upper = [None] * total
    objective = [ZERO] * nq + [ONE] + [ZERO] * nq
    out = lp_solve(LPProblem(RationalMatrixSystem(rows, rhs), lower, upper,
                             objective, "max"))
    if out.status != "optimal" or out.value <= 0:
        return None
    eps = out.x[nq]
    index = quad_index(T)
    return AngleAssignment({q: out.x[i] + eps for q, i in index.items()})


def chi_star(T, alpha, x):
    """Formal Euler characteristic of a normal solution, in pi units equal to
    minus the angle-weighted sum of the quad coordinates.

    ``alpha`` must be a generalised angle structure and ``x`` must satisfy the
    matching equations (checked; PreconditionViolated otherwise).  The value
    does not depend on which generalised structure is supplied.
    """
    from . import normal

    if any(v != 0 for v in alpha.residual(T)):
        raise PreconditionViolated("alpha is not a generalised angle structure")
    vec = normal.as_vector(T, x)
    system = normal.matching_system(T)
    if any(v != 0 for v in system.residual(vec)):
        raise PreconditionViolated("vector fails the matching equations")
    # the quad coordinate of q sits at column 7*tet + 4 + axis
    total = ZERO
    for q in T.quad_types():
        total -= alpha[q] * vec[7 * q.tet + 4 + q.axis]
    return total


SHAPE_EPS = 1e-12


class ShapeAngles:
    """Angles read off complex shape parameters, with exact snapping.

    Angles are floats in pi units; values within the snap tolerance of a
    rational with small denominator are also recorded exactly.  The exact
    deciders only ever consume the snapped values.
    """

    def __init__(self, angles_float, exact, flat_tets, edge_angle_residuals,
                 edge_log_residuals):
        self.angles_float = angles_float
        self.exact = exact
        self.flat_tets = tuple(flat_tets)
        self.edge_angle_residuals = edge_angle_residuals
        self.edge_log_residuals = edge_log_residuals

    @property
    def is_exact(self):
        return all(v is not None for v in self.exact.values())

    def to_assignment(self):
        if not self.is_exact:
            return None
        return AngleAssignment(self.exact)

    def vertical_quads(self):
        return frozenset(q for q, v in self.exact.items() if v == 0)

    def vertical_set(self):
        return VerticalQuadSet(self.vertical_quads(), source=self)

    @property
    def kind(self):
        lo = min(self.angles_float.values())
        hi = max(self.angles_float.values())
        if lo > SHAPE_EPS and hi < 1 - SHAPE_EPS:
            return "strict"
        if lo > -SHAPE_EPS and hi < 1 + SHAPE_EPS:
            return "semi"
        return "generalized"


def shape_parameters(z):
    """The three edge-pair parameters of a tetrahedron with shape z, indexed
    by quad axis: (01)/(23) -> z, (02)/(13) -> 1/(1-z), (03)/(12) -> (z-1)/z."""
    return (z, 1 / (1 - z), (z - 1) / z)


def angles_from_shapes(T, shapes, tolerance=1e-9, max_denominator=16):
    """Derive an angle assignment from complex shape parameters.

    Shapes with negative imaginary part raise NegativelyOriented.  Each edge
    class must satisfy its consistency condition (angle sum 2 pi and product
    of parameters 1, i.e. log-sum 2 pi i) within the tolerance, else
    EdgeEquationViolated carrying every violated edge is raised.
    """
    if len(shapes) != T.n:
        raise PreconditionViolated("need one shape per tetrahedron")
    zs = []
    for t, s in enumerate(shapes):
        z = complex(s[0], s[1]) if isinstance(s, (tuple, list)) else complex(s)
        if z.imag < -tolerance:
            raise NegativelyOriented(t, z)
        if abs(z) < SHAPE_EPS or abs(z - 1) < SHAPE_EPS:
            raise PreconditionViolated("tetrahedron %d has degenerate shape %r" % (t, z))
        zs.append(z)

    angles_float = {}
    loglens = {}
    exact = {}
    for t, z in enumerate(zs):
        for axis, w in enumerate(shape_parameters(z)):
            # upper half plane: clamp tiny (or signed-zero) imaginary parts,
            # avoiding -0.0 which would flip atan2 to the lower branch
            if w.imag < -tolerance * max(1.0, abs(w)):
                raise NegativelyOriented(t, z)
            im = w.imag if w.imag > 0.0 else 0.0
            phase = math.atan2(im, w.real)
            q = QuadType(t, axis)
            units = phase / math.pi
            angles_float[q] = units
            loglens[q] = math.log(abs(w))
            snapped = Fraction(units).limit_denominator(max_denominator)
            if abs(units - float(snapped)) <= tolerance:
                exact[q] = mpq(snapped.numerator, snapped.denominator)
            else:
                exact[q] = None

    flat_tets = []
    for t in range(T.n):
        vals = sorted(exact[QuadType(t, axis)] for axis in range(3)
                      if exact[QuadType(t, axis)] is not None)
        if vals == [mpq(0), mpq(0), mpq(1)]:
            flat_tets.append(t)

    angle_residuals = []
    log_residuals = []
    violations = []
    for e, cls in enumerate(T.edge_classes):
        s = sum(angles_float[q] for q in cls.quad_sequence)
        logsum = sum(loglens[q] for q in cls.quad_sequence)
        angle_residuals.append(abs(s - 2.0) * math.pi)
        log_residuals.append(abs(logsum))
        if angle_residuals[-1] > tolerance or log_residuals[-1] > tolerance:
            violations.append((e, max(angle_residuals[-1], log_residuals[-1])))
    if violations:
        raise EdgeEquationViolated(violations)

    return ShapeAngles(angles_float, exact, flat_tets, angle_residuals,
                       log_residuals)
