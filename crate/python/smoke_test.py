"""Smoke test for the pyschiffer extension module.

Build and install first, e.g. ``pip install --no-build-isolation ./crates/python``.
"""

import math
from fractions import Fraction

import pyschiffer


def close(a, b, tol):
    return abs(a - b) < tol


def main():
    # y² = x³ − x is the square lattice: τ = i
    c1 = pyschiffer.Curve([0, -1, 0, 1], name="x3-x")
    assert c1.genus == 1
    tau = c1.period_matrix()[0][0]
    assert close(tau, 1j, 1e-12), tau

    # θ₃(0, i) = π^{1/4} / Γ(3/4)
    t3, tail = pyschiffer.theta_null([[1j]], [0], [0])
    assert close(t3, math.pi ** 0.25 / math.gamma(0.75), 1e-12), t3
    assert tail < 1e-12

    c2 = pyschiffer.Curve([-1, 0, 0, 0, 0, Fraction(1)])
    pi = c2.period_matrix()
    sym, lam = c2.certificate()
    assert sym < 1e-10 and lam > 0
    assert all(close(pi[i][j], pi[j][i], 1e-10) for i in range(2) for j in range(2))

    # Weierstrass points are hyperelliptic, generic ones are not
    assert c2.hyper_test("branch:1")[0]
    assert not c2.hyper_test("0.3:0.4,+")[0]
    jet = c2.aj_jet("0.3:0.4,+", order=2)
    assert len(jet) == 2 and len(jet[0]) == 2

    z = c2.abel_jacobi("0.3:0.4,+")
    assert len(z) == 2

    # first-order variation is a rank-one symmetric update
    d1, d2 = c2.schiffer("0.3:0.4,+", order=2)
    det = d1[0][0] * d1[1][1] - d1[0][1] * d1[1][0]
    assert abs(det) < 1e-12 * max(abs(x) for row in d1 for x in row) ** 2
    pe = c2.varied_period_matrix("0.3:0.4,+", 1e-3, order=2)
    assert close(pe[0][1], pi[0][1] + 1e-3 * d1[0][1] + 1e-6 * d2[0][1], 1e-14)

    # every vector is rational in genus one
    rational, residual, witnesses = pyschiffer.rationality_test([0.3 + 0.2j], [[tau]])
    assert rational and len(witnesses) == 2, (residual, witnesses)

    try:
        pyschiffer.Curve([0, 1, 2, 1])
    except ValueError as e:
        assert "squarefree" in str(e)
    else:
        raise AssertionError("repeated root accepted")

    print("pyschiffer smoke test: ok")


if __name__ == "__main__":
    main()
