"""Reference values computed independently of the package under test.

Everything in this module uses only the standard library, so the expected
numbers do not depend on the quadrature, the ODE solver, or the Lanczos
gamma implementation being verified.  The frozen tables were produced
from the closed forms below (checked against a 30-digit evaluation) and
from a 30-digit Taylor-method integration of the warping initial value
problem; they pin the oracles themselves against accidental edits.
"""

import math


def ball_volume(m):
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


def sphere_area(m):
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def beta_fn(a, b):
    return math.gamma(a) * math.gamma(b) / math.gamma(a + b)


def sharp_beta_k(m, p):
    """Normalisation and sharp constant by reduction to Beta integrals.

    Substituting s = t^(p/(p-1)) turns the mass and energy integrals of
    the extremal profile at lam = 1 into Euler Beta values:

        mass kernel   = ((p-1)/p) B(m - m/p, m/p),
        energy kernel = ((p-1)/p) B(1 + m - m/p, m/p - 1),

    from which beta = (omega_sphere * mass kernel)^(-1/p*) and
    K^(-p) = omega_sphere * ((m-p)/(p-1))^p * beta^p * energy kernel.
    """
    a = m - m / p
    mass = sphere_area(m) * ((p - 1.0) / p) * beta_fn(a, m / p)
    p_star = m * p / (m - p)
    beta = mass ** (-1.0 / p_star)
    energy = (
        sphere_area(m)
        * ((m - p) / (p - 1.0)) ** p
        * ((p - 1.0) / p)
        * beta**p
        * beta_fn(a + 1.0, m / p - 1.0)
    )
    return beta, energy ** (-1.0 / p)


def talenti_k(m, p):
    """Second, fully independent closed form of the sharp constant."""
    return (
        math.pi**-0.5
        * m ** (-1.0 / p)
        * ((p - 1.0) / (m - p)) ** (1.0 - 1.0 / p)
        * (
            math.gamma(1.0 + m / 2.0)
            * math.gamma(m)
            / (math.gamma(m / p) * math.gamma(1.0 + m - m / p))
        )
        ** (1.0 / m)
    )


# (m, p) -> (beta, K), frozen from sharp_beta_k above.
SHARP_TABLE = {
    (3, 1.5): (0.78159264179677203, 0.26053088059892401),
    (3, 2.0): (0.86025401382809963, 0.42726054286252666),
    (3, 2.5): (0.92492783075856483, 0.84326385993852083),
    (4, 1.5): (0.85088271813992321, 0.21064855911867708),
    (4, 2.0): (0.883004417448563, 0.31218920569777795),
    (4, 3.0): (0.91387775811214291, 0.76324562381965158),
    (6, 1.5): (1.3910758663681752, 0.1625306486664222),
    (6, 2.0): (1.246141073285066, 0.22786518979477994),
    (6, 3.0): (0.9945163776010667, 0.41767070620159403),
}


# Warping IVP h'' = G h, h(0) = 0, h'(0) = 1 with G = 2 b0 / (1 + t^2)^2,
# solved by a 30-digit Taylor method and rounded to double precision.
RATIONAL_B1_H = {1.0: 1.2284862549731913, 5.0: 9.4217449703884224, 10.0: 20.725235792593298}
RATIONAL_B1_HP = {1.0: 1.5508831969180257, 10.0: 2.2800565541883449}
RATIONAL_B01_H = {
    1.0: 1.0215953603527666,
    5.0: 5.3699706378829968,
    10.0: 10.872821440390038,
    20.0: 21.894337522783714,
}
RATIONAL_B01_HP = {5.0: 1.0985304366839599, 20.0: 1.1024221744487378}
SINH_1 = 1.1752011936438015

# Geodesic ball volumes of the m=4 model with G = 0.2/(1+t^2)^2, from the
# same 30-digit solution integrated against the area weight.
VOLUME_RATIONAL01 = {1.0: 5.1729916331920054, 5.0: 3746.3798106822894}


def head_m4_p2(lam, T=1.0, beta=SHARP_TABLE[(4, 2.0)][0]):
    """Share of the p*-mass of phi_lam inside radius T for m=4, p=2.

    The density integral reduces under u = s/(lam+s), s = t^2, to the
    cancellation-free polynomial form below with U = T^2/(lam + T^2).
    """
    U = T * T / (lam + T * T)
    return ball_volume(4) * 4.0 * beta**4 * (U**3 / 3.0 - U**4 / 4.0)


# Root of head_m4_p2(lam) = 1e-3 at T = 1, found at 30 digits.
HEAD_CROSSING_1E3 = 14.615694241117555
