"""Exact rational linear algebra and linear programming.

Everything here runs over arbitrary-precision rationals (gmpy2.mpq): solutions
satisfy their systems with residual exactly zero, infeasibility comes with a
Farkas certificate, and no tolerance enters any decision.  The simplex uses
Bland's rule, so it terminates and pivots deterministically.
"""

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)


def rat(x):
    """Coerce ints, strings like "3/5", floats of integral value, to mpq."""
    if isinstance(x, float):
        if x != int(x):
            raise ValueError("refusing to coerce non-integral float %r" % x)
        return mpq(int(x))
    return mpq(x)


def rat_str(q):
    return str(q)


class InconsistentSystem(Exception):
    """Raised by solve_linear; carries the certifying row combination.

    Summing certificate[i] * row_i gives the zero functional with a non-zero
    right-hand side.
    """

    def __init__(self, certificate):
        super().__init__("inconsistent linear system")
        self.certificate = certificate


class RationalMatrixSystem:
    """Rows of rational coefficients with a right-hand side and variable tags."""

    def __init__(self, rows, rhs, var_names=None):
        self.rows = [[mpq(a) for a in row] for row in rows]
        self.rhs = [mpq(b) for b in rhs]
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("rows of differing length")
        self.num_vars = width.pop() if width else (len(var_names) if var_names else 0)
        if len(self.rows) != len(self.rhs):
            raise ValueError("rhs length does not match row count")
        self.var_names = list(var_names) if var_names is not None else None
        if self.var_names is not None and self.rows and len(self.var_names) != self.num_vars:
            raise ValueError("variable name count does not match row width")

    @property
    def num_rows(self):
        return len(self.rows)

    def residual(self, x):
        return [sum((a * xi for a, xi in zip(row, x)), ZERO) - b
                for row, b in zip(self.rows, self.rhs)]

    def stack(self, other):
        if other.num_vars != self.num_vars:
            raise ValueError("cannot stack systems of different widths")
        return RationalMatrixSystem(self.rows + other.rows, self.rhs + other.rhs,
                                    self.var_names)


class LinearSolution:
    """Particular solution plus a reduced-echelon nullspace basis."""

    def __init__(self, particular, nullspace, pivot_columns):
        self.particular = particular
        self.nullspace = nullspace
        self.pivot_columns = pivot_columns

    @property
    def rank(self):
        return len(self.pivot_columns)


def _pivot_weight(q):
    # partial pivoting: prefer entries with small numerator*denominator size
    return q.numerator.bit_length() + q.denominator.bit_length()


def solve_linear(system):
    """Exact Gauss-Jordan elimination.

    Returns a LinearSolution; raises InconsistentSystem with the certifying
    row combination when there is no solution.
    """
    m, n = system.num_rows, system.num_vars
    a = [list(row) + [system.rhs[i]] for i, row in enumerate(system.rows)]
    # track row operations: ops[i] holds the coefficients expressing the
    # current row i as a combination of the input rows
    ops = [[ONE if j == i else ZERO for j in range(m)] for i in range(m)]
    pivot_cols = []
    r = 0
    for col in range(n):
        best = None
        for i in range(r, m):
            if a[i][col] != 0:
                w = _pivot_weight(a[i][col])
                if best is None or w < best[0]:
                    best = (w, i)
        if best is None:
            continue
        i = best[1]
        a[r], a[i] = a[i], a[r]
        ops[r], ops[i] = ops[i], ops[r]
        piv = a[r][col]
        if piv != 1:
            inv = ONE / piv
            a[r] = [v * inv for v in a[r]]
            ops[r] = [v * inv for v in ops[r]]
        for k in range(m):
            if k != r and a[k][col] != 0:
                f = a[k][col]
                a[k] = [v - f * w for v, w in zip(a[k], a[r])]
                ops[k] = [v - f * w for v, w in zip(ops[k], ops[r])]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            raise InconsistentSystem(list(ops[i]))

    particular = [ZERO] * n
    for k, col in enumerate(pivot_cols):
        particular[col] = a[k][n]
    pivot_set = set(pivot_cols)
    nullspace = []
    for free in range(n):
        if free in pivot_set:
            continue
        vec = [ZERO] * n
        vec[free] = ONE
        for k, col in enumerate(pivot_cols):
            vec[col] = -a[k][free]
        nullspace.append(vec)
    return LinearSolution(particular, nullspace, pivot_cols)


class LPProblem:
    """maximize/minimize objective . x  subject to  eq.rows x = eq.rhs and
    componentwise bounds lower <= x <= upper (entries may be None for
    unbounded)."""

    def __init__(self, eq, lower, upper, objective=None, sense="max"):
        self.eq = eq
        n = eq.num_vars
        self.lower = list(lower)
        self.upper = list(upper)
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bound vectors do not match variable count")
        if objective is None:
            objective = [ZERO] * n
            sense = "feasibility"
        self.objective = [mpq(c) for c in objective]
        self.sense = sense

    @property
    def num_vars(self):
        return self.eq.num_vars


class FarkasCertificate:
    """Infeasibility certificate for {Ax = b, l <= x <= u}.

    With y on the equality rows and p, q >= 0 on the finite lower/upper
    bounds: A^T y = p - q while y.b - p.l + q.u < 0, so no feasible point
    exists.
    """

    def __init__(self, y, p, q):
        self.y = y
        self.p = p
        self.q = q

    def contradiction_value(self, problem):
        val = sum((yi * bi for yi, bi in zip(self.y, problem.eq.rhs)), ZERO)
        for j in range(problem.num_vars):
            if self.p[j]:
                val -= self.p[j] * problem.lower[j]
            if self.q[j]:
                val += self.q[j] * problem.upper[j]
        return val

    def verify(self, problem):
        n = problem.num_vars
        for j in range(n):
            combo = sum((self.y[i] * problem.eq.rows[i][j]
                         for i in range(problem.eq.num_rows)), ZERO)
            if combo != self.p[j] - self.q[j]:
                return False
            if self.p[j] < 0 or self.q[j] < 0:
                return False
            if self.p[j] != 0 and problem.lower[j] is None:
                return False
            if self.q[j] != 0 and problem.upper[j] is None:
                return False
        return self.contradiction_value(problem) < 0


class LPOutcome:
    def __init__(self, status, x=None, value=None, farkas=None):
        self.status = status  # "optimal" | "infeasible" | "unbounded"
        self.x = x
        self.value = value
        self.farkas = farkas

    def __repr__(self):
        return "LPOutcome(%s, value=%s)" % (self.status, self.value)


class _Tableau:
    """Dense simplex tableau over mpq with Bland's rule."""

    def __init__(self, matrix, rhs, cols):
        self.m = len(matrix)
        self.cols = cols
        self.rows = [list(r) + [rhs[i]] for i, r in enumerate(matrix)]
        self.basis = [None] * self.m

    def pivot(self, r, col):
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            inv = ONE / piv
            self.rows[r] = row = [v * inv for v in row]
        for k in range(self.m):
            other = self.rows[k]
            f = other[col]
            if k != r and f != 0:
                self.rows[k] = [v - f * w for v, w in zip(other, row)]
        self.basis[r] = col

    def solution(self):
        x = [ZERO] * self.cols
        for r, col in enumerate(self.basis):
            x[col] = self.rows[r][-1]
        return x

    def optimize(self, cost, allowed):
        """Minimize cost.y by Bland's rule; returns ("optimal", z, cost_row)
        or ("unbounded", entering column, direction info)."""
        z = [mpq(c) for c in cost] + [ZERO]
        # reduce cost row against the current (unit column) basis
        for r, col in enumerate(self.basis):
            f = z[col]
            if f != 0:
                z = [v - f * w for v, w in zip(z, self.rows[r])]
        while True:
            enter = None
            for j in range(self.cols):
                if allowed[j] and z[j] < 0:
                    enter = j
                    break
            if enter is None:
                value = sum((mpq(cost[col]) * self.rows[r][-1]
                             for r, col in enumerate(self.basis)), ZERO)
                return "optimal", value, z
            leave = None
            best = None
            for r in range(self.m):
                a = self.rows[r][enter]
                if a > 0:
                    ratio = self.rows[r][-1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best:
                        best = key
                        leave = r
            if leave is None:
                return "unbounded", enter, z
            f = z[enter]
            self.pivot(leave, enter)
            if f != 0:
                z = [v - f * w for v, w in zip(z, self.rows[leave])]


def lp_solve(problem):
    """Exact two-phase simplex over the bounded problem.

    Deterministic: Bland's rule with ties broken by lowest variable index.
    """
    eq = problem.eq
    n = problem.num_vars
    m = eq.num_rows

    # variable transforms to y >= 0
    # kinds[j]: ("shift", ycol, l) / ("flip", ycol, u) / ("split", ypos, yneg)
    kinds = []
    ycount = 0
    ub_rows = []  # (ycol, bound, original var)
    for j in range(n):
        lo, up = problem.lower[j], problem.upper[j]
        if lo is not None:
            kinds.append(("shift", ycount, mpq(lo)))
            if up is not None:
                ub_rows.append((ycount, mpq(up) - mpq(lo), j))
            ycount += 1
        elif up is not None:
            kinds.append(("flip", ycount, mpq(up)))
            ycount += 1
        else:
            kinds.append(("split", ycount, ycount + 1))
            ycount += 2

    nslack = len(ub_rows)
    total_cols = ycount + nslack + m + nslack  # y, slacks, artificials
    art0 = ycount + nslack

    def ycoeff(j, aij, row):
        kind = kinds[j]
        if kind[0] == "shift":
            row[kind[1]] += aij
            return aij * kind[2]
        if kind[0] == "flip":
            row[kind[1]] -= aij
            return aij * kind[2]
        row[kind[1]] += aij
        row[kind[2]] -= aij
        return ZERO

    matrix = []
    rhs = []
    for i in range(m):
        row = [ZERO] * total_cols
        shiftconst = ZERO
        for j in range(n):
            aij = eq.rows[i][j]
            if aij != 0:
                shiftconst += ycoeff(j, aij, row)
        d = eq.rhs[i] - shiftconst
        matrix.append(row)
        rhs.append(d)
    for k, (ycol, bound, _) in enumerate(ub_rows):
        row = [ZERO] * total_cols
        row[ycol] = ONE
        row[ycount + k] = ONE
        matrix.append(row)
        rhs.append(bound)

    # normalize signs, then install slack/artificial basis columns
    tab = _Tableau(matrix, rhs, total_cols)
    art_for_row = [None] * tab.m
    art_count = 0
    for r in range(tab.m):
        if tab.rows[r][-1] < 0:
            tab.rows[r] = [-v for v in tab.rows[r]]
        if r >= m and tab.rows[r][ycount + (r - m)] == 1:
            tab.basis[r] = ycount + (r - m)  # slack usable directly
        else:
            col = art0 + art_count
            art_count += 1
            tab.rows[r][col] = ONE
            tab.basis[r] = col
            art_for_row[r] = col

    allowed = [True] * total_cols
    for c in range(art0 + art_count, total_cols):
        allowed[c] = False

    phase1_cost = [ZERO] * total_cols
    for c in range(art0, art0 + art_count):
        phase1_cost[c] = ONE
    status, value, zrow = tab.optimize(phase1_cost, allowed)
    assert status == "optimal"
    if value > 0:
        # Farkas: multipliers from reduced costs on artificial columns
        lam_std = [None] * tab.m
        for r in range(tab.m):
            col = art_for_row[r]
            lam_std[r] = (ONE - zrow[col]) if col is not None else -zrow[ycount + (r - m)]
        # rows with negative rhs were negated before phase 1, so flip those back
        lam = [-l if rhs[r] < 0 else l for r, l in enumerate(lam_std)]
        y = [-lam[i] for i in range(m)]
        lam_ub = lam[m:]
        p = [ZERO] * n
        q = [ZERO] * n
        ub_of_var = {j: k for k, (_, _, j) in enumerate(ub_rows)}
        for j in range(n):
            kind = kinds[j]
            colsum = sum((lam[i] * eq.rows[i][j] for i in range(m)), ZERO)
            if kind[0] == "shift":
                lub = lam_ub[ub_of_var[j]] if j in ub_of_var else ZERO
                p[j] = -(colsum + lub)
                q[j] = -lub
            elif kind[0] == "flip":
                q[j] = colsum
        cert = FarkasCertificate(y, p, q)
        return LPOutcome("infeasible", farkas=cert)

    # drive leftover basic artificials out (degenerate rows)
    for r in range(tab.m):
        if tab.basis[r] >= art0:
            for j in range(art0):
                if tab.rows[r][j] != 0:
                    tab.pivot(r, j)
                    break

    for c in range(art0, total_cols):
        allowed[c] = False

    phase2_cost = [ZERO] * total_cols
    sign = -1 if problem.sense == "max" else 1
    for j in range(n):
        c = problem.objective[j]
        if c == 0:
            continue
        kind = kinds[j]
        if kind[0] == "shift":
            phase2_cost[kind[1]] += sign * c
        elif kind[0] == "flip":
            phase2_cost[kind[1]] -= sign * c
        else:
            phase2_cost[kind[1]] += sign * c
            phase2_cost[kind[2]] -= sign * c

    if problem.sense != "feasibility":
        status, value, _ = tab.optimize(phase2_cost, allowed)
        if status == "unbounded":
            return LPOutcome("unbounded")

    ysol = tab.solution()
    x = []
    objective_value = ZERO
    for j in range(n):
        kind = kinds[j]
        if kind[0] == "shift":
            xj = kind[2] + ysol[kind[1]]
        elif kind[0] == "flip":
            xj = kind[2] - ysol[kind[1]]
        else:
            xj = ysol[kind[1]] - ysol[kind[2]]
        x.append(xj)
        objective_value += problem.objective[j] * xj
    return LPOutcome("optimal", x=x,
                     value=(objective_value if problem.sense != "feasibility" else ZERO))
