#!/usr/bin/env python3
"""Independent reference values for the Rust test suite, computed with mpmath.

Prints `name = value` lines; the numbers are frozen into
crates/core/tests/reference_values.rs. Re-run after changing a convention:

    python3 tools/oracle_values.py

Conventions mirrored from the library:
  * potential V(r) = 7.5 r^2 e^{-r} - 1/r with mu = hbar = 1, so the reduced
    radial equation is u'' = [l(l+1)/r^2 + 15 r^2 e^{-r} - 2/r - k^2] u and
    eta = -1/k;
  * C_l(eta) = e^{-pi eta/2} |Gamma(l+1+i eta)| / l!   (C_l(0) = 1);
  * h(eta) = Re psi(1+i eta) - ln|eta|,  M = 2 eta h / C_0^2;
  * D_l = C_l k^{l+1};  F~ = F/D,  G~ = (G - M D F~) D/k;
  * S = e^{2 i sigma_l} (kA - (M-i)D^2 B)/(kA - (M+i)D^2 B);
  * sigma_l = pi/k^2 (2l+1) |S - 1|^2 with the full (Coulomb-including) S.
"""

import mpmath as mp

mp.mp.dps = 30


def out(name, value):
    if isinstance(value, mp.mpc):
        print(f"{name} = ({mp.nstr(value.real, 17)}, {mp.nstr(value.imag, 17)})")
    else:
        print(f"{name} = {mp.nstr(value, 17)}")


def barrier_c(l, eta):
    return mp.exp(-mp.pi * eta / 2) * abs(mp.gamma(l + 1 + 1j * eta)) / mp.factorial(l)


def m_factor(eta):
    h = mp.re(mp.digamma(1 + 1j * eta)) - mp.log(abs(eta))
    c0sq = barrier_c(0, eta) ** 2
    return 2 * eta * h / c0sq


def coulomb_phase(l, eta):
    return mp.im(mp.loggamma(l + 1 + 1j * eta))


def fg(l, eta, rho):
    f = mp.coulombf(l, eta, rho)
    g = mp.coulombg(l, eta, rho)
    fp = mp.diff(lambda x: mp.coulombf(l, eta, x), rho)
    gp = mp.diff(lambda x: mp.coulombg(l, eta, x), rho)
    return f, g, fp, gp


def regular_start(l, k2, r, terms=80):
    """Frobenius series u = sum c_j r^{j+l+1} of the full reduced equation."""
    c = [mp.mpf(1)]
    for j in range(1, terms):
        acc = -2 * c[j - 1]
        if j >= 2:
            acc -= k2 * c[j - 2]
        for m in range(0, j - 3):
            acc += 15 * (-1) ** m / mp.factorial(m) * c[j - 4 - m]
        c.append(acc / (j * (j + 2 * l + 1)))
    u = sum(cj * r ** (j + l + 1) for j, cj in enumerate(c))
    up = sum(cj * (j + l + 1) * r ** (j + l) for j, cj in enumerate(c))
    return u, up


def exact_partial_sigma(l, energy, r_match=45):
    k2 = 2 * mp.mpf(energy)
    k = mp.sqrt(k2)
    eta = -1 / k
    r0 = mp.mpf("0.05")
    u0, up0 = regular_start(l, k2, r0)

    def rhs(r, y):
        return [y[1], (l * (l + 1) / r**2 + 15 * r**2 * mp.exp(-r) - 2 / r - k2) * y[0]]

    u, up = mp.odefun(rhs, r0, [u0, up0])(mp.mpf(r_match))
    f, g, fp, gp = fg(l, eta, k * r_match)
    # u = a F + b G with r-derivatives k F', k G'
    a = (u * k * gp - up * g) / (k * (f * gp - fp * g))
    b = (up * f - u * k * fp) / (k * (f * gp - fp * g))
    delta = mp.atan2(b, a)
    s = mp.exp(2j * (coulomb_phase(l, eta) + delta))
    return mp.pi / k2 * (2 * l + 1) * abs(s - 1) ** 2


def poly_p(energies, n, e):
    p = mp.mpf(1)
    for m, em in enumerate(energies):
        if m + 1 != n:
            p *= em - e
    return p


def main():
    out("ln_gamma_half", mp.loggamma(mp.mpf("0.5")))
    out("ln_gamma_2p5_1p5i", mp.loggamma(mp.mpc(2.5, 1.5)))
    out("ln_gamma_m2p5_0p3i", mp.loggamma(mp.mpc(-2.5, 0.3)))
    out("digamma_1_m0p25i", mp.digamma(mp.mpc(1, -0.25)))
    out("digamma_0p3_4i", mp.digamma(mp.mpc(0.3, 4)))

    out("coulomb_phase_l0_eta_m0p25", coulomb_phase(0, mp.mpf("-0.25")))
    out("coulomb_phase_l2_eta_m0p5", coulomb_phase(2, mp.mpf("-0.5")))
    out("barrier_c_l1_eta_m0p25", barrier_c(1, mp.mpf("-0.25")))
    out("barrier_c_l2_eta_1p5", barrier_c(2, mp.mpf("1.5")))
    # eta = -0.25 with z = -2 means k = 4, E = 8
    out("m_factor_eta_m0p25", m_factor(mp.mpf("-0.25")))

    for name, (l, eta, rho) in {
        "fg_l1_eta_m0p25_rho2": (1, mp.mpf("-0.25"), mp.mpf(2)),
        "fg_l0_eta_m1_rho0p5": (0, mp.mpf(-1), mp.mpf("0.5")),
        "fg_l2_eta_m0p5_rho30": (2, mp.mpf("-0.5"), mp.mpf(30)),
        "fg_l0_eta_2_rho5": (0, mp.mpf(2), mp.mpf(5)),
    }.items():
        f, g, fp, gp = fg(l, eta, rho)
        out(name + "_f", f)
        out(name + "_g", g)
        out(name + "_fp", fp)
        out(name + "_gp", gp)

    # complex energy E = 4 - 0.5i on the principal k, rho = k r at r = 3
    e = mp.mpc(4, -0.5)
    k = mp.sqrt(2 * e)
    eta = -1 / k
    rho = 3 * k
    for l in (0, 1):
        f = mp.coulombf(l, eta, rho)
        g = mp.coulombg(l, eta, rho)
        out(f"h_plus_l{l}_e4_m0p5i_r3", f - 1j * g)
        out(f"h_minus_l{l}_e4_m0p5i_r3", f + 1j * g)

    # Humblet functions at E = 3, r = 1, l = 1
    e = mp.mpf(3)
    k = mp.sqrt(2 * e)
    eta = -1 / k
    l = 1
    f, g, fp, gp = fg(l, eta, k)
    d = barrier_c(l, eta) * k ** (l + 1)
    m = m_factor(eta)
    ft = f / d
    ftp = k * fp / d
    out("humblet_l1_e3_r1_f", ft)
    out("humblet_l1_e3_r1_fp", ftp)
    out("humblet_l1_e3_r1_g", (g - m * d * ft) * d / k)
    out("humblet_l1_e3_r1_gp", (k * gp - m * d * ftp) * d / k)

    # R-matrix value, l = 0 reference parameters, E = 3
    gam = [mp.mpf("0.36862"), mp.mpf("0.59070e-2"), mp.mpf("0.44958"), mp.mpf("0.88622")]
    en = [0, mp.mpf("1.78"), 4, 20]
    out("r_matrix_l0_e3", sum(gi**2 / (ei - 3) for gi, ei in zip(gam, en)))

    # Jost-model S-matrix with the l = 0 reference coefficients, E = 3
    basis = [mp.mpf("1.78"), mp.mpf(4), mp.mpf(0)]
    alpha = [mp.mpf(x) for x in ("3.8898e5", "-19.967", "-2.0212e5", "5.3628e5")]
    beta = [mp.mpf(x) for x in ("4.9502e4", "30.567", "3.0482e4", "9.7332e3")]
    a_val = sum(al * poly_p(basis, n, e) for n, al in enumerate(alpha))
    b_val = sum(be * poly_p(basis, n, e) for n, be in enumerate(beta))
    out("model_a_l0_e3", a_val)
    out("model_b_l0_e3", b_val)
    d0 = barrier_c(0, eta) * k
    m = m_factor(eta)
    s = mp.exp(2j * coulomb_phase(0, eta)) * (k * a_val - (m - 1j) * d0**2 * b_val) / (
        k * a_val - (m + 1j) * d0**2 * b_val
    )
    out("model_s_l0_e3", s)

    for energy in ("2.5", "3"):
        for l in (0, 1, 2):
            out(f"exact_sigma_l{l}_e{energy.replace('.', 'p')}", exact_partial_sigma(l, mp.mpf(energy)))


if __name__ == "__main__":
    main()
