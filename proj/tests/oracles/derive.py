"""Independent high-precision reference values for the test suite.

Propagates the field across delta sites directly (no transfer matrices, no
Jost bookkeeping), finds |N| by dense scan plus bisection in mpmath, and
prints a C++ header of frozen constants.

    python3 tests/oracles/derive.py > tests/frozen_values.hpp
"""

import mpmath as mp

mp.mp.dps = 40
I = mp.mpc(0, 1)


def power(z, nu):
    return lambda m: z * mp.power(m, nu)


def left_field(sites, k, n):
    """Left incidence seeded by psi = n e^{iKx} right of the support.

    Returns (A, B): psi = A e^{iKx} + B e^{-iKx} left of the support.
    """
    sites = sorted(sites, key=lambda s: s[0])
    b = sites[-1][0]
    psi = n * mp.exp(I * k * b)
    dpsi = I * k * psi
    x = b
    for c, f in reversed(sites):
        d = c - x
        psi, dpsi = psi * mp.cos(k * d) + dpsi * mp.sin(k * d) / k, -k * psi * mp.sin(k * d) + dpsi * mp.cos(k * d)
        x = c
        dpsi = dpsi - f(abs(psi)) * psi
    A = (dpsi + I * k * psi) / (2 * I * k) * mp.exp(-I * k * x)
    B = -(dpsi - I * k * psi) / (2 * I * k) * mp.exp(I * k * x)
    return A, B


def right_field(sites, k, n):
    """Right incidence seeded by psi = n e^{-iKx} left of the support.

    Returns (A, B) with psi = A e^{iKx} + B e^{-iKx} right of the support:
    B is the incident coefficient, A the reflected one.
    """
    sites = sorted(sites, key=lambda s: s[0])
    a = sites[0][0]
    psi = n * mp.exp(-I * k * a)
    dpsi = -I * k * psi
    x = a
    for c, f in sites:
        d = c - x
        psi, dpsi = psi * mp.cos(k * d) + dpsi * mp.sin(k * d) / k, -k * psi * mp.sin(k * d) + dpsi * mp.cos(k * d)
        x = c
        dpsi = dpsi + f(abs(psi)) * psi
    A = (dpsi + I * k * psi) / (2 * I * k) * mp.exp(-I * k * x)
    B = -(dpsi - I * k * psi) / (2 * I * k) * mp.exp(I * k * x)
    return A, B


def incident(sites, k, side, n):
    if side == "l":
        A, _ = left_field(sites, k, n)
        return abs(A)
    _, B = right_field(sites, k, n)
    return abs(B)


def rt(sites, k, side, n):
    if side == "l":
        A, B = left_field(sites, k, n)
        return B / A, n / A
    A, B = right_field(sites, k, n)
    # transmitted n e^{-iKx} left, incident B e^{-iKx} right
    return A / B, n / B


def roots(sites, k, side, absA, x_lo, x_hi, grid=40000):
    xs = [x_lo + (x_hi - x_lo) * mp.mpf(i) / grid for i in range(grid + 1)]
    r = [incident(sites, k, side, x) - absA for x in xs]
    out = []
    for i in range(grid):
        if r[i] == 0:
            out.append(xs[i])
        elif (r[i] < 0) != (r[i + 1] < 0):
            lo, hi, rlo = xs[i], xs[i + 1], r[i]
            for _ in range(140):
                mid = (lo + hi) / 2
                rm = incident(sites, k, side, mid) - absA
                if (rm < 0) == (rlo < 0):
                    lo, rlo = mid, rm
                else:
                    hi = mid
            out.append((lo + hi) / 2)
    return out


def emit(name, value):
    print(f"inline constexpr double {name} = {mp.nstr(value, 20)};")


def main():
    print("#pragma once")
    print("")
    print("// Generated by tests/oracles/derive.py; do not edit.")
    print("")
    print("namespace frozen {")
    print("")

    # Kerr cubic, z = 2i, K = 1, |A| = 1: u = x^2 solves u^3 - 2u^2 + u - 1 = 0.
    u = [r for r in mp.polyroots([1, -2, 1, -1], maxsteps=200, extraprec=60) if abs(mp.im(r)) < 1e-30]
    emit("kKerr2iRoot", mp.sqrt(mp.re(u[0])))

    # fig2-nu2 preset at K = 5, |A| = 1 (three branches).
    f = power(I, 2)
    sites = [(-0.5, f), (0.5, f)]
    for side in ("l", "r"):
        rs = roots(sites, mp.mpf(5), side, 1, mp.mpf("0.01"), mp.mpf(6), grid=6000)
        print(f"inline constexpr int kFig2Nu2K5Count_{side} = {len(rs)};")
        for j, x in enumerate(rs):
            R, T = rt(sites, mp.mpf(5), side, x)
            emit(f"kFig2Nu2K5_{side}_n{j}", x)
            emit(f"kFig2Nu2K5_{side}_T2_{j}", abs(T) ** 2)

    # fig3-nu2 preset at K = 1.5, |A| = 1.
    sites = [(-0.5, power(mp.mpc(1, -1), 2)), (0.5, power(mp.mpc(1, 1), 2))]
    for side in ("l", "r"):
        rs = roots(sites, mp.mpf("1.5"), side, 1, mp.mpf("0.001"), mp.mpf(8), grid=8000)
        print(f"inline constexpr int kFig3Nu2K15Count_{side} = {len(rs)};")
        for j, x in enumerate(rs):
            R, T = rt(sites, mp.mpf("1.5"), side, x)
            emit(f"kFig3Nu2K15_{side}_n{j}", x)
            emit(f"kFig3Nu2K15_{side}_T2_{j}", abs(T) ** 2)

    # fig4 preset: z1 = -0.5 - i (nu 2), z2 = 1 + 2i (nu 1), K = 2, |A| = 1.
    sites = [(-0.5, power(mp.mpc(-0.5, -1), 2)), (0.5, power(mp.mpc(1, 2), 1))]
    for side in ("l", "r"):
        rs = roots(sites, mp.mpf(2), side, 1, mp.mpf("0.001"), mp.mpf(8), grid=8000)
        print(f"inline constexpr int kFig4K2Count_{side} = {len(rs)};")
        for j, x in enumerate(rs):
            R, T = rt(sites, mp.mpf(2), side, x)
            emit(f"kFig4K2_{side}_n{j}", x)
            emit(f"kFig4K2_{side}_reT_{j}", mp.re(T))
            emit(f"kFig4K2_{side}_imT_{j}", mp.im(T))
            emit(f"kFig4K2_{side}_reR_{j}", mp.re(R))
            emit(f"kFig4K2_{side}_imR_{j}", mp.im(R))

    print("")
    print("}  // namespace frozen")


if __name__ == "__main__":
    main()
