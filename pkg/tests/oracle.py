"""Independent sympy models used only by the tests.

U(b) acts faithfully on functions of x by l_i -> d/dx_i and X_j -> e^{x_j};
the operators in (e^t, h d/dt, h) act on functions of t as written.
"""

import sympy as sp


def xs(rank):
    return sp.symbols(f"x1:{rank + 1}")


def act_no(elem, f, x):
    """Apply a normal-ordered U(b) element to the sympy expression f."""
    out = 0
    for (I, J), c in elem.terms.items():
        g = f
        for xi, k in zip(x, J):
            if k:
                g = sp.diff(g, xi, k)
        out += sp.Rational(c.numerator, c.denominator) * sp.exp(sum(i * xi for i, xi in zip(I, x))) * g
    return out


def act_diffop(op, f, t, h):
    out = 0
    for (D, J, m), c in op.terms.items():
        g = f
        for ti, k in zip(t, J):
            for _ in range(k):
                g = h * sp.diff(g, ti)
        out += sp.Rational(c.numerator, c.denominator) * sp.exp(sum(d * ti for d, ti in zip(D, t))) * h ** m * g
    return out


def generic(x):
    return sp.Function("f")(*x)
