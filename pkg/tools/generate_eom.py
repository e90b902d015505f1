#!/usr/bin/env python3
"""Derive the closed-form mass matrix and velocity/gravity bias terms.

Run offline; writes src/spherebot/_eom_terms.py (pure Python) and
src/spherebot/_eom_terms.pxi (Cython include) containing identical
expression bodies.  The derivation starts from the frame chain and body
inertias only: angular velocities are extracted symbolically as
vee(R^T dR/dt), so the emitted code is independent of the hand-written
kinematics module it will later be tested against.

Generalized coordinate order: q = (X, Z, phi, theta, psi, beta).
"""

import sys
from pathlib import Path

import sympy as sp

OUT_PY = Path(__file__).resolve().parents[1] / "src" / "spherebot" / "_eom_terms.py"
OUT_PXI = Path(__file__).resolve().parents[1] / "src" / "spherebot" / "_eom_terms.pxi"

HEADER = '''"""Closed-form mass matrix and bias terms.

Auto-generated by tools/generate_eom.py; do not edit by hand.  The
expressions were derived symbolically from the body kinematics and
inertias and are verified against energy-based oracles in the test
suite.  M is written row-major into a flat length-36 buffer; b into a
length-6 buffer.  Coordinate order: (X, Z, phi, theta, psi, beta).
"""

from math import cos, sin

'''

PXI_HEADER = """# Auto-generated by tools/generate_eom.py; do not edit by hand.
# Same expression bodies as _eom_terms.py, rendered for C. The including
# module must `from libc.math cimport sin, cos`.

"""


def rot(axis, a):
    c, s = sp.cos(a), sp.sin(a)
    if axis == "x":
        return sp.Matrix([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return sp.Matrix([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    return sp.Matrix([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def vee(W):
    return sp.Matrix([W[2, 1], W[0, 2], W[1, 0]])


def derive():
    t = sp.symbols("t")
    m_H, m_Y, m_P, R_s, R_p, g = sp.symbols("m_H m_Y m_P R_s R_p g", positive=True)

    qf = [sp.Function(n)(t) for n in ("X", "Z", "phi", "theta", "psi", "beta")]
    X, Z, phi, theta, psi, beta = qf
    qd_f = [sp.diff(f, t) for f in qf]

    R_GY = rot("y", phi) * rot("x", theta)
    R_GP = rot("y", phi) * rot("x", theta + beta)
    R_GH = R_GY * rot("z", psi)

    # body angular velocities from the rotation matrices themselves
    w_Y = vee(sp.simplify(R_GY.T * sp.diff(R_GY, t)))
    w_P = vee(sp.simplify(R_GP.T * sp.diff(R_GP, t)))
    w_H = vee(sp.simplify(R_GH.T * sp.diff(R_GH, t)))

    I_H = sp.Rational(2, 3) * m_H * R_s**2 * sp.eye(3)
    I_Y = sp.Rational(1, 4) * sp.diag(m_Y * R_s**2, 2 * m_Y * R_s**2, m_Y * R_s**2)
    I_P = sp.Rational(1, 3) * sp.diag(m_P * R_p**2, 0, m_P * R_p**2)

    r_P = sp.Matrix([X, R_s, Z]) + R_GP * sp.Matrix([0, -R_p, 0])
    v_P = sp.diff(r_P, t)

    K = (
        sp.Rational(1, 2) * (m_H + m_Y) * (sp.diff(X, t) ** 2 + sp.diff(Z, t) ** 2)
        + sp.Rational(1, 2) * m_P * (v_P.T * v_P)[0]
        + sp.Rational(1, 2) * (w_H.T * I_H * w_H)[0]
        + sp.Rational(1, 2) * (w_Y.T * I_Y * w_Y)[0]
        + sp.Rational(1, 2) * (w_P.T * I_P * w_P)[0]
    )
    # height of the bob above the sphere-center datum; yoke COM sits at
    # the datum so its term is identically zero
    V = m_P * g * (R_GP * sp.Matrix([0, -R_p, 0]))[1]

    # swap time functions for plain symbols
    qs = sp.symbols("X Z phi theta psi beta")
    qds = sp.symbols("Xd Zd phid thetad psid betad")
    subs = list(zip(qd_f, qds)) + list(zip(qf, qs))
    K = K.subs(subs)
    V = V.subs(subs)

    qd_vec = sp.Matrix(qds)
    M = sp.hessian(K, qds)
    M = M.applyfunc(lambda e: sp.trigsimp(sp.expand(e)))

    # b_i = sum_jk dM_ij/dq_k qd_j qd_k - dK/dq_i + dV/dq_i
    b = sp.zeros(6, 1)
    for i in range(6):
        conv = sum(
            sp.diff(M[i, j], qs[k]) * qds[j] * qds[k]
            for j in range(6)
            for k in range(6)
        )
        b[i] = sp.trigsimp(sp.expand(conv - sp.diff(K, qs[i]) + sp.diff(V, qs[i])))

    return qs, qds, (m_H, m_Y, m_P, R_s, R_p, g), M, b, K, V


def spot_check(M, b, K, V, qs, qds, pars):
    """Numeric sanity before anything is written."""
    m_H, m_Y, m_P, R_s, R_p, g = pars
    P0 = {m_H: 1.5, m_Y: 1.0, m_P: 0.5, R_s: 0.15, R_p: 0.10, g: 9.81}
    zeros = {s: 0 for s in qs} | {s: 0 for s in qds}

    M0 = M.subs(P0).subs(zeros)
    assert abs(M0[0, 0] - 3.0) < 1e-14, M0[0, 0]
    assert abs(M0[4, 4] - sp.Rational(2, 3) * 1.5 * 0.15**2) < 1e-14, M0[4, 4]
    k_spin = K.subs(P0).subs(zeros | {qds[4]: 1}).subs({qds[4]: 1})
    assert abs(float(k_spin) - 0.01125) < 1e-15, k_spin
    v0 = float(V.subs(P0).subs(zeros))
    assert abs(v0 + 0.4905) < 1e-15, v0
    # K == 1/2 qd' M qd at a generic point
    import random

    random.seed(7)
    pt = {s: random.uniform(-1, 1) for s in list(qs) + list(qds)}
    lhs = float(K.subs(P0).subs(pt))
    qdv = sp.Matrix([pt[s] for s in qds])
    rhs = float((sp.Rational(1, 2) * qdv.T * M.subs(P0).subs(pt) * qdv)[0])
    assert abs(lhs - rhs) < 1e-12, (lhs, rhs)
    # b with zero rates leaves only gravity in the theta and beta slots
    bz = b.subs(P0).subs({s: 0 for s in qds}).subs({qs[3]: 0.15, qs[5]: 0.05, qs[2]: 0.3})
    grav = 0.5 * 9.81 * 0.10 * sp.sin(0.2)
    assert abs(float(bz[3]) - float(grav)) < 1e-14
    assert abs(float(bz[5]) - float(grav)) < 1e-14
    for i in (0, 1, 2, 4):
        assert bz[i] == 0, (i, bz[i])
    print("spot checks passed")


def _code(expr, lang):
    if lang == "pxi":
        return sp.ccode(expr)
    # bare sin/cos are imported at module top
    return sp.pycode(expr).replace("math.", "")


def render(assignments, results, targets, lang):
    """Render cse output as assignment statements.

    targets: list of (buffer_name, flat_index) aligned with results.
    """
    lines = []
    for sym, expr in assignments:
        code = _code(expr, lang)
        if lang == "pxi":
            lines.append(f"    cdef double {sym} = {code}")
        else:
            lines.append(f"    {sym} = {code}")
    for (buf, idx), expr in zip(targets, results):
        lines.append(f"    {buf}[{idx}] = {_code(expr, lang)}")
    return lines


def emit(qs, qds, pars, M, b):
    m_H, m_Y, m_P, R_s, R_p, g = pars
    X, Z, phi, theta, psi, beta = qs
    Xd, Zd, phid, thetad, psid, betad = qds

    mass_exprs = [M[i, j] for i in range(6) for j in range(6)]
    mass_targets = [("M", i * 6 + j) for i in range(6) for j in range(6)]
    repl, red = sp.cse(mass_exprs, optimizations="basic")
    mass_py = render(repl, red, mass_targets, "py")
    mass_pxi = render(repl, red, mass_targets, "pxi")

    bias_exprs = [b[i] for i in range(6)]
    bias_targets = [("b", i) for i in range(6)]
    repl, red = sp.cse(bias_exprs, optimizations="basic")
    bias_py = render(repl, red, bias_targets, "py")
    bias_pxi = render(repl, red, bias_targets, "pxi")

    mass_sig = "M, m_H, m_Y, m_P, R_s, R_p, phi, theta, beta"
    bias_sig = "b, m_H, m_Y, m_P, R_s, R_p, g, phi, theta, beta, phid, thetad, psid, betad, Xd, Zd"

    with open(OUT_PY, "w") as f:
        f.write(HEADER)
        f.write(f"\ndef fill_mass({mass_sig}):\n")
        f.write("\n".join(mass_py))
        f.write("\n\n\ndef fill_bias({}):\n".format(bias_sig))
        f.write("\n".join(bias_py))
        f.write("\n")

    c_mass_sig = ", ".join(
        ["double* M"] + [f"double {n}" for n in mass_sig.split(", ")[1:]]
    )
    c_bias_sig = ", ".join(
        ["double* b"] + [f"double {n}" for n in bias_sig.split(", ")[1:]]
    )
    with open(OUT_PXI, "w") as f:
        f.write(PXI_HEADER)
        f.write(f"cdef void _fill_mass({c_mass_sig}) noexcept nogil:\n")
        f.write("\n".join(mass_pxi))
        f.write(f"\n\n\ncdef void _fill_bias({c_bias_sig}) noexcept nogil:\n")
        f.write("\n".join(bias_pxi))
        f.write("\n")
    print(f"wrote {OUT_PY}")
    print(f"wrote {OUT_PXI}")


def main():
    qs, qds, pars, M, b, K, V = derive()
    spot_check(M, b, K, V, qs, qds, pars)
    emit(qs, qds, pars, M, b)
    return 0


if __name__ == "__main__":
    sys.exit(main())
