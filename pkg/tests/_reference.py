"""High-precision reference spectra, transcribed term by term.

The production code in gupnoise.spectra rearranges the perturbation blocks
for float64 stability (factored secular numerator, sum-of-squares
denominators, exact gamma0^2 + omega0^2 = Omega^2). This module keeps the
naive expanded forms and evaluates them with mpmath at high precision, so the
tests can prove the rearrangements are algebraically identical rather than
approximately so. Everything here is deliberately slow and simple.
"""

import mpmath as mp

H = mp.mpf("6.62607015e-34")
HBAR = H / (2 * mp.pi)
K_B = mp.mpf("1.380649e-23")
C = mp.mpf("299792458")


def optics(nu, P, L, kappa):
    nu, P, L, kappa = map(mp.mpf, (nu, P, L, kappa))
    G = 2 * mp.pi * nu / L
    alpha_sq = 4 * P / (kappa * HBAR * 2 * mp.pi * nu)
    finesse = mp.pi * C / (kappa * L)
    return G, alpha_sq, finesse


def standard(m, Omega, gamma, T, nu, P, L, kappa, eta2, omega, include_shot=True):
    m, Omega, gamma, T, omega = map(mp.mpf, (m, Omega, gamma, T, omega))
    G, alpha_sq, _ = optics(nu, P, L, kappa)
    kappa = mp.mpf(kappa)
    det = gamma**2 * omega**2 + (omega**2 - Omega**2) ** 2
    zeta = 1 + 4 * omega**2 / kappa**2
    s = 2 * gamma * K_B * T / (m * det)
    s += 4 * HBAR**2 * alpha_sq * G**2 / (kappa * zeta * m**2 * det)
    if include_shot:
        s += kappa * zeta / (16 * alpha_sq * G**2 * mp.mpf(eta2))
    return s


def kb_t_prime_adiabatic(m, gamma, T, nu, P, L, kappa):
    m, gamma, T = map(mp.mpf, (m, gamma, T))
    _, _, finesse = optics(nu, P, L, kappa)
    return K_B * T + 8 * H * mp.mpf(nu) * finesse**2 * mp.mpf(P) / (mp.pi**2 * C**2 * gamma * m)


def perturbed_general(m, Omega, gamma, kbtp, nu, P, L, kappa, A, omega):
    """Expanded-form transcription of the first-order spectrum perturbation."""
    m, Omega, gamma, kbtp, A, omega = map(mp.mpf, (m, Omega, gamma, kbtp, A, omega))
    kappa = mp.mpf(kappa)
    g0 = gamma / 2
    w0 = mp.sqrt(4 * Omega**2 - gamma**2) / 2
    if P == 0:
        h2a2g2 = mp.mpf(0)
    else:
        G, alpha_sq, _ = optics(nu, P, L, kappa)
        h2a2g2 = HBAR**2 * alpha_sq * G**2

    u = g0**2 + 4 * w0**2
    c2 = kappa**2 + 4 * w0**2
    c6 = kappa**2 + 36 * w0**2
    theta = kbtp * m

    W = -3 * h2a2g2 * w0**2 / (u * c2)
    I1 = 39 * h2a2g2 * w0**2 * kappa**4 / (u * c2**2 * c6)
    J1 = theta * g0 / w0 - 8 * h2a2g2 * w0 * kappa * (5 * kappa**2 + 18 * w0**2) * (
        g0**2 + 3 * w0**2
    ) / (u * c2**2 * c6)
    I2 = HBAR**2 * w0**2 * m / (6 * kbtp)
    J2 = -(HBAR**2) * w0 * g0 * m / (6 * kbtp)
    M = g0 * theta
    N = theta * w0
    Y = 16 * h2a2g2 * kappa * (g0 * kappa**4 + 6 * kappa**3 * w0**2 + 88 * kappa * w0**4) / (c2**3 * c6)
    Z = -16 * h2a2g2 * kappa * w0 * (kappa**4 + 12 * kappa**2 * w0**2 - 96 * w0**4) / (c2**3 * c6)
    R = -16 * h2a2g2 * kappa**2 * (g0 * kappa + 2 * w0**2) / c2**3

    w2 = omega**2
    u2 = g0**2 + w0**2
    v = g0**2 - w0**2
    It = I1 + I2
    Jt = J1 + J2

    d1 = w2**2 + 2 * w2 * v + u2**2
    b1 = (w2 * (Jt * w0 - g0 * It) - u2 * (g0 * It + Jt * w0)) / d1

    b2_num = (
        w2**2 * (-(g0**2) * M + M * w0**2 - 6 * g0 * N * w0)
        + w2 * (M * (10 * g0**2 * w0**2 + g0**4 + w0**4) - 4 * g0 * N * w0 * v)
        + u2**2 * (g0**2 * M - M * w0**2 + 2 * g0 * N * w0)
        - M * w2**3
    )
    b2 = b2_num / d1**2

    b3 = 2 * R * kappa / (kappa**2 + 4 * w2)

    d4 = w2**2 + 6 * w2 * v + 81 * u2**2
    b4 = 3 * W * g0 * (w2 + 9 * g0**2 + 9 * w0**2) / d4

    q = kappa / 2
    d5 = w2**2 + 2 * w2 * (q**2 - 4 * w0**2) + (q**2 + 4 * w0**2) ** 2
    b5 = (w2 * (-Y * q - 2 * w0 * Z) - (q**2 + 4 * w0**2) * (Y * q - 2 * w0 * Z)) / d5

    bracket = b1 + b2 - b3 - b4 + b5
    return (-4 * A * kbtp / (m * w0**2)) * bracket


def perturbed_adiabatic(m, Omega, gamma, kbtp, A, omega):
    m, Omega, gamma, kbtp, A, omega = map(mp.mpf, (m, Omega, gamma, kbtp, A, omega))
    w2 = omega**2
    det = gamma**2 * w2 + (w2 - Omega**2) ** 2
    return (
        16 * A * gamma * kbtp**2 * w2 * (w2 - Omega**2) / det**2
        + 2 * A * gamma * w2 * HBAR**2 / (3 * det)
    )
