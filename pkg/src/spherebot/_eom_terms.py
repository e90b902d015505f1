"""Closed-form mass matrix and bias terms.

Auto-generated by tools/generate_eom.py; do not edit by hand.  The
expressions were derived symbolically from the body kinematics and
inertias and are verified against energy-based oracles in the test
suite.  M is written row-major into a flat length-36 buffer; b into a
length-6 buffer.  Coordinate order: (X, Z, phi, theta, psi, beta).
"""

from math import cos, sin


def fill_mass(M, m_H, m_Y, m_P, R_s, R_p, phi, theta, beta):
    x0 = m_H + m_P + m_Y
    x1 = cos(phi)
    x2 = beta + theta
    x3 = R_p*m_P
    x4 = x3*sin(x2)
    x5 = -x1*x4
    x6 = sin(phi)
    x7 = x3*cos(x2)
    x8 = -x6*x7
    x9 = x4*x6
    x10 = -x1*x7
    x11 = R_s**2
    x12 = m_H*x11
    x13 = 8*x12
    x14 = m_Y*x11
    x15 = sin(beta)
    x16 = x15**2
    x17 = R_p**2*m_P
    x18 = 16*x17
    x19 = sin(theta)
    x20 = x19**2
    x21 = 3*x14
    x22 = 32*x17
    x23 = (2/3)*x12
    x24 = -x19*x23
    x25 = (4/3)*x17
    M[0] = x0
    M[1] = 0
    M[2] = x5
    M[3] = x8
    M[4] = 0
    M[5] = x8
    M[6] = 0
    M[7] = x0
    M[8] = x9
    M[9] = x10
    M[10] = 0
    M[11] = x10
    M[12] = x5
    M[13] = x9
    M[14] = (1/12)*x13 + (1/2)*x14 + (1/12)*x15*x19*x22*cos(beta)*cos(theta) + (1/12)*x16*x18 - 1/12*x16*x20*x22 + (1/12)*x18*x20 - 1/12*x20*x21
    M[15] = 0
    M[16] = x24
    M[17] = 0
    M[18] = x8
    M[19] = x10
    M[20] = 0
    M[21] = (1/12)*x13 + (1/12)*x18 + (1/12)*x21
    M[22] = 0
    M[23] = x25
    M[24] = 0
    M[25] = 0
    M[26] = x24
    M[27] = 0
    M[28] = x23
    M[29] = 0
    M[30] = x8
    M[31] = x10
    M[32] = 0
    M[33] = x25
    M[34] = 0
    M[35] = x25


def fill_bias(b, m_H, m_Y, m_P, R_s, R_p, g, phi, theta, beta, phid, thetad, psid, betad, Xd, Zd):
    x0 = betad**2
    x1 = beta + theta
    x2 = sin(x1)
    x3 = sin(phi)
    x4 = x2*x3
    x5 = phid**2
    x6 = thetad**2
    x7 = 2*betad
    x8 = cos(phi)
    x9 = phid*cos(x1)
    x10 = x8*x9
    x11 = thetad*x7
    x12 = 2*thetad
    x13 = R_p*m_P
    x14 = x2*x8
    x15 = x3*x9
    x16 = R_s**2
    x17 = cos(theta)
    x18 = m_H*psid*x16*x17
    x19 = m_Y*x16*sin(2*theta)
    x20 = phid*thetad
    x21 = sin(2*x1)
    x22 = R_p**2*m_P
    x23 = 16*x21*x22
    x24 = g*x2
    x25 = (2/3)*x21*x5
    b[0] = x13*(x0*x4 - x10*x12 - x10*x7 + x11*x4 + x4*x5 + x4*x6)
    b[1] = x13*(x0*x14 + x11*x14 + x12*x15 + x14*x5 + x14*x6 + x15*x7)
    b[2] = (1/12)*betad*phid*x23 - 2/3*thetad*x18 - 1/4*x19*x20 + (1/12)*x20*x23
    b[3] = (2/3)*phid*x18 + x13*x24 + (1/8)*x19*x5 - x22*x25
    b[4] = -2/3*m_H*x16*x17*x20
    b[5] = -x13*(R_p*x25 - x24)
