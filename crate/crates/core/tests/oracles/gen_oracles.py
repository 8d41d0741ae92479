"""Arbitrary-precision reference values frozen into the Rust test suite.

Run with `python3 gen_oracles.py`; requires mpmath and sympy.
"""
import mpmath as mp
from sympy.physics.wigner import wigner_3j

mp.mp.dps = 40

def I(nu, x): return mp.besseli(nu, x)
def K(nu, x): return mp.besselk(nu, x)

print("# bessel ln values (nu, x, ln I, ln K)")
for nu, x in [(0.5, 1), (1.5, 1), (0.5, 1e-6), (10.5, 0.01), (60.5, 1), (200.5, 50),
              (0.5, 700), (200.5, 700), (30.5, 100), (100.5, 3), (3.5, 3), (-0.5, 2)]:
    nu = mp.mpf(nu); x = mp.mpf(x)
    print(f"({float(nu)}, {mp.nstr(x, 17)}, {mp.nstr(mp.log(I(nu, x)), 20)}, {mp.nstr(mp.log(K(nu, x)), 20)}),")

def zM(l, x):
    e = l + mp.mpf(1) / 2
    return K(e, x) / I(e, x)

def zE(l, x):
    e = l + mp.mpf(1) / 2
    Kp = mp.diff(lambda t: K(e, t), x)
    Ip = mp.diff(lambda t: I(e, t), x)
    return (K(e, x) + 2 * x * Kp) / (I(e, x) + 2 * x * Ip)

print("# zeta values (l, x, zeta_M, zeta_E)")
for l, x in [(1, 1), (5, 2.5), (10, 7), (40, 0.5)]:
    print(f"({l}, {x}, {mp.nstr(zM(l, x), 20)}, {mp.nstr(zE(l, x), 20)}),")

print("# T-matrix kr=1, l=1 (E, M)")
x = mp.mpf(1)
print(mp.nstr(-mp.pi / 2 / zE(1, x), 20), mp.nstr(-mp.pi / 2 / zM(1, x), 20))

print("# 3j values")
for args in [(60, 60, 40, 30, -30, 0), (61, 59, 100, 5, -5, 0), (45, 50, 7, 20, -20, 0),
             (30, 30, 60, 30, -30, 0), (12, 7, 9, 3, -3, 0)]:
    print(args, float(wigner_3j(*[a for a in (args[2], args[0], args[1], args[5], args[3], args[4])])))

mp.mp.dps = 20

def zeta_pair(l, x):
    e = l + mp.mpf(1) / 2
    k, i = K(e, x), I(e, x)
    kp = -K(e + 1, x) + e / x * k
    ip = I(e + 1, x) + e / x * i
    return (k + 2 * x * kp) / (i + 2 * x * ip), k / i

def fg(y, L=80):
    def integrand(x):
        z = x * y
        s = [mp.mpf(0)] * 4
        for l in range(1, L + 1):
            zE_, zM_ = zeta_pair(l, x)
            Il, Im = I(l - mp.mpf(1) / 2, z), I(l + mp.mpf(3) / 2, z)
            a = ((l + 1) * Il**2 + l * Im**2) / (2 * z)
            b = z / (2 * (2 * l + 1)) * (Il - Im)**2
            c = ((l * l - 1) * Il**2 / 2 + l * (l + 2) * Im**2 / 2 - 3 * l * (l + 1) * Il * Im) / (2 * z * (2 * l + 1))
            d = z / (4 * (2 * l + 1)) * (Il - Im)**2
            s[0] += zE_ * a - zM_ * b
            s[1] += zM_ * a - zE_ * b
            s[2] += zE_ * c + zM_ * d
            s[3] += zM_ * c + zE_ * d
        return [x**3 * v for v in s]
    cache = {}
    def component(k):
        def h(x):
            if x not in cache:
                cache[x] = integrand(x)
            return cache[x][k]
        return h
    return [mp.quad(component(k), [0, 1, 4, 12, 40, 80]) for k in range(4)]

print("# f_E, f_M, g_E, g_M at y = 0.5 (l <= 80)")
print([mp.nstr(v, 15) for v in fg(mp.mpf('0.5'))])
print("# f_E(0), f_M(0)")
print(mp.nstr(mp.quad(lambda x: 2 / mp.pi * x**3 * zeta_pair(1, x)[0], [0, 1, 4, 12, 40]), 15),
      mp.nstr(mp.quad(lambda x: 2 / mp.pi * x**3 * zeta_pair(1, x)[1], [0, 1, 4, 12, 40]), 15))
