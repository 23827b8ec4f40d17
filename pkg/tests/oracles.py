"""Independent high-precision oracles (mpmath).

Nothing here imports the package.  `python3 tests/oracles.py` prints the
values that are frozen into tests/frozen.py.
"""
import mpmath as mp

mp.mp.dps = 40


def hoppings(theta, w=1, delta=mp.mpf("0.3")):
    c = mp.cos(theta)
    return w * (1 - delta * c), w * (1 + delta * c)


def critical(theta):
    w1, w2 = hoppings(theta)
    return (abs(w1 ** 2 - w2 ** 2) / w1, mp.sqrt(2 * (w1 ** 2 + w2 ** 2)), (w1 ** 2 + w2 ** 2) / w1)


def bloch(theta, u, k):
    w1, w2 = hoppings(theta)
    e = mp.expj(k)
    return mp.matrix([[1j * u, w1, 0, w2 / e], [w1, -1j * u, w2, 0], [0, w2, 0, w1], [w2 * e, 0, w1, 0]])


def spectrum(theta, u, k):
    return sorted(mp.eig(bloch(theta, u, k), left=False, right=False),
                  key=lambda z: (float(mp.re(z)), float(mp.im(z))))


def winding_by_roots(theta, u):
    """All-band Zak winding in the d-site gauge = number of roots of
    h(q) = -w2^2 q^3 + (w1^2-2w2^2-u^2) q^2 + (2w1^2-w2^2-2u^2) q + w1^2
    inside the unit disk (valid outside the gapless window)."""
    w1, w2 = hoppings(theta)
    u = mp.mpf(u)
    a, b = w1 ** 2, w2 ** 2
    roots = mp.polyroots([-b, a - 2 * b - u * u, 2 * a - b - 2 * u * u, a], maxsteps=200, extraprec=200)
    return sum(1 for r in roots if abs(r) < 1), min(abs(abs(r) - 1) for r in roots)


def ep_loci(theta, u):
    w1, w2 = hoppings(theta)
    a, b = w1 ** 2, w2 ** 2
    u = mp.mpf(u)
    a1 = (4 * u * u * b - u ** 4 - 8 * a * b) / (8 * a * b)
    a2 = (a * a + b * b - a * u * u) / (2 * a * b)
    return (mp.acos(a1) if abs(a1) <= 1 else None, mp.acos(a2) if abs(a2) <= 1 else None)


def obc_values(theta, u, n_cells=10):
    """All open-chain eigenvalues.

    The chain is rebuilt here from the site/bond rules (bonds alternate
    w1, w2 starting with w1 on a-b; gain +iu on a, loss -iu on b).
    """
    w1, w2 = hoppings(theta)
    u = mp.mpf(u)
    n = 4 * n_cells
    M = mp.matrix(n, n)
    for i in range(n):
        M[i, i] = [1j * u, -1j * u, 0, 0][i % 4]
        if i + 1 < n:
            M[i, i + 1] = M[i + 1, i] = w1 if i % 2 == 0 else w2
    return mp.eig(M, left=False, right=False)


def _c(z):
    return "complex(%s, %s)" % (mp.nstr(mp.re(z), 17), mp.nstr(mp.im(z), 17))


if __name__ == "__main__":
    pi = mp.pi
    print("CRITICAL = {")
    for name, th in [("0", 0), ("pi/4", pi / 4), ("pi/2", pi / 2), ("3pi/4", 3 * pi / 4), ("pi", pi)]:
        print(f"    {name!r}: ({', '.join(mp.nstr(x, 17) for x in critical(th))}),")
    print("}")
    print("HOPPINGS_PI4 =", tuple(mp.nstr(x, 17) for x in hoppings(pi / 4)))
    print("SPECTRA = {")
    for th, thn, u, k in [(pi / 4, "pi/4", "0.5", "1.0"), (3 * pi / 4, "3pi/4", "0.5", "pi/2"), (pi / 4, "pi/4", "3.5", "2.0")]:
        kk = pi / 2 if k == "pi/2" else mp.mpf(k)
        z = spectrum(th, mp.mpf(u), kk)
        print(f"    ({thn!r}, {u}, {k!r}): [{', '.join('complex(%s, %s)' % (mp.nstr(mp.re(x), 17), mp.nstr(mp.im(x), 17)) for x in z)}],")
    print("}")
    print("EP_PI4 = {")
    for u in ["1.077", "1.5", "2.0"]:
        e1, e2 = ep_loci(pi / 4, u)
        print(f"    {u}: ({mp.nstr(e1, 17) if e1 is not None else None}, {mp.nstr(e2, 17) if e2 is not None else None}),")
    print("}")
    print("WINDING = {")
    pts = [("0", 0, "0.5"), ("pi/4", pi / 4, "0.5"), ("pi/4", pi / 4, "3.0"), ("pi/2", pi / 2, "3.0"),
           ("3pi/4", 3 * pi / 4, "3.0"), ("3pi/4", 3 * pi / 4, "0.5"), ("pi", pi, "0.5"), ("pi", pi, "2.0"),
           ("pi/4", pi / 4, "0.01"), ("3pi/4", 3 * pi / 4, "0.01"), ("pi/4", pi / 4, "1e-5"), ("3pi/4", 3 * pi / 4, "1e-5"),
           ("-pi/4", -pi / 4, "0.5"), ("pi/4", pi / 4, "1.0"), ("0", 0, "3.5"), ("pi/3", pi / 3, "0.2"), ("2pi/3", 2 * pi / 3, "0.2"),
           ("pi/2", pi / 2, "2.5"), ("pi/4", pi / 4, "3.5")]
    for name, th, u in pts:
        n, dist = winding_by_roots(th, u)
        print(f"    ({name!r}, {u}): {n},  # closest root {mp.nstr(dist, 3)} from the unit circle")
    print("}")
    print("OBC_EDGE = {")
    v = obc_values(pi / 4, "0.5")
    print(f"    ('pi/4', 0.5): [{', '.join(_c(z) for z in v if abs(mp.re(z)) < 1e-6)}],")
    v = obc_values(pi / 4, "3.5")
    top = max(v, key=lambda z: mp.im(z))
    pair = sorted((z for z in v if abs(z - mp.mpc(0.8135, -0.2259)) < 0.01 or abs(z - mp.mpc(-0.8135, -0.2259)) < 0.01),
                  key=lambda z: mp.re(z))
    print(f"    ('pi/4', 3.5): [{', '.join(_c(z) for z in [top] + pair)}],")
    v = obc_values(3 * pi / 4, "0.5")
    print(f"    ('3pi/4', 0.5): [{', '.join(_c(z) for z in v if abs(mp.re(z)) < 1e-6)}],")
    print("}")
