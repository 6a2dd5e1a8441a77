"""Regenerates the frozen Riccati-Bessel products in tests/specfun_reference.rs.

Requires mpmath. Prints Rust tuples (n, t_re, t_im, p_jh, p_jh_prime, p_mixed).
"""
from mpmath import mp, mpf, mpc, besselj, hankel1, sqrt, pi, diff

mp.dps = 60
I = mpc(0, 1)


def riccati(n, t):
    nu = n + mpf(1) / 2
    c = sqrt(pi * t / 2)
    j = c * besselj(nu, t)
    h = c * hankel1(nu, t)
    jp = sqrt(pi / 2) * (besselj(nu, t) / (2 * sqrt(t)) + sqrt(t) * besselj(nu, t, derivative=1))
    hp = sqrt(pi / 2) * (hankel1(nu, t) / (2 * sqrt(t)) + sqrt(t) * diff(lambda x: hankel1(nu, x), t))
    return j, h, jp, hp


CASES = [
    (0, 1), (1, 1), (5, "1.05"), (10, "1.52"), (60, 1), (200, 1), (500, "1.05"),
    (100, 419), (1000, 419), (300, 210), (50, "6.29"), (7, "9.11"), (150, "12.6"),
    (0, "i"), (5, "i"), (40, "i"),
]


def fmt(z):
    z = mpc(z)
    return "c({}, {})".format(mp.nstr(z.real, 17, min_fixed=-1, max_fixed=1),
                              mp.nstr(z.imag, 17, min_fixed=-1, max_fixed=1))


for n, t in CASES:
    tt = I if t == "i" else mpf(t)
    j, h, jp, hp = riccati(n, tt)
    pjh = 2 * I * j * h
    pjhp = -2 * I * jp * hp
    pm = I * (j * hp + jp * h)
    tre, tim = (0.0, 1.0) if t == "i" else (float(mpf(t)), 0.0)
    print(f"    ({n}, {tre!r}, {tim!r}, {fmt(pjh)}, {fmt(pjhp)}, {fmt(pm)}),")
