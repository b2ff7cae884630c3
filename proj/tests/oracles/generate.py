"""Reference values frozen into the unit tests.

Every value here is computed independently of the C++ code, at extended
precision with mpmath (or with scipy where noted). Run with python3 and copy
the printed constants into tests/oracle_values.hpp.
"""

import math

import mpmath as mp
import numpy as np
from scipy import special

mp.mp.dps = 40

out = {}


def harmonic_k32_sum():
    # sum_k H_k k^{-3/2} in two forms; the default nsum acceleration is
    # unreliable on this slowly converging series, so Euler-Maclaurin is forced.
    em = "euler-maclaurin"
    a = mp.nsum(lambda j: mp.zeta(mp.mpf(3) / 2, j) / j, [1, mp.inf], method=em)
    b = mp.nsum(lambda k: (mp.digamma(k + 1) + mp.euler) * k ** (-mp.mpf(3) / 2), [1, mp.inf], method=em)
    assert abs(a - b) < mp.mpf(10) ** -15, (a, b)
    return a


# b* for log, x0 = e: b clamped to 1 at k = 1, 2.
mp.mp.dps = 25
s = mp.mpf(1) + mp.mpf(1) / 2
s += mp.fsum(1 / (k * mp.log(k)) for k in range(3, 10**6 + 1))
mp.mp.dps = 40
out["bstar_log_1e6"] = s

c_const = 1 / harmonic_k32_sum()
out["gamma_const_c"] = c_const
out["gamma_const_1"] = c_const * mp.zeta(mp.mpf(3) / 2)
out["gamma_const_10"] = c_const / 10 * mp.zeta(mp.mpf(3) / 2, 10)

# alpha for constant b: max_{n <= 1000} |alpha_n| sqrt(n)
mp.mp.dps = 25
g = [mp.mpf(0)] + [c_const / n * mp.zeta(mp.mpf(3) / 2, n) for n in range(1, 1001)]
alpha = [mp.mpf(1)]
for n in range(1, 1001):
    alpha.append(mp.fsum(g[k] * alpha[n - k] for k in range(1, n + 1)))
out["alpha_const_1000"] = alpha[1000]
out["alpha_const_sqrt_max"] = max(abs(alpha[n]) * mp.sqrt(n) for n in range(1, 1001))
alpha8 = alpha[:8]
mp.mp.dps = 40

# sum_{n<=N} delta_n = binom(2N, N) / 4^N
N = 10**6
out["delta_partial_1e6"] = mp.binomial(2 * N, N) / mp.power(4, N)

for beta in (0.25, 0.5, 0.75):
    b = mp.mpf(beta)
    n = 10**4
    an = mp.gamma(n + 1 - b) / (mp.gamma(1 - b) * mp.gamma(n + 1))
    out[f"zygmund_ratio_{beta}"] = an * mp.power(n, b) * mp.gamma(1 - b)

# ||U_16||^2 for atoms {0.9 w 1, 0.5i w 2}
def un(z, w, n):
    return w * abs(mp.fsum(z**k for k in range(1, n + 1))) ** 2


out["un_two_atoms_16"] = un(mp.mpf("0.9"), 1, 16) + un(mp.mpc(0, "0.5"), 2, 16)

# weighted norm of the alpha prefix (a_0..a_7) against the same two atoms
def wn(z, w):
    return w * abs(mp.fsum(alpha8[k] * z**k for k in range(8))) ** 2


out["weighted_alpha8_two_atoms"] = wn(mp.mpf("0.9"), 1) + wn(mp.mpc(0, "0.5"), 2)

# resolvent for lacunary kMax = 10 at t = 1 - 1/1024:
# ||E[Gamma_t|F_0]||^2 = sum_{j>=0} (sum_{n>=0} t^n a_{n+j})^2
t = 1 - mp.mpf(1) / 1024
lags = {2**k: mp.mpf(k) ** (-mp.mpf(9) / 4) for k in range(1, 11)}
tot = mp.mpf(0)
for j in range(0, 2**10 + 1):
    inner = mp.fsum(a * t ** (L - j) for L, a in lags.items() if L >= j)
    tot += inner**2
out["resolvent_lacunary10"] = mp.sqrt(tot)

# factorial remainders r_l = frac(l! e) and eigenvalues cos^2(2 pi r_l)
mp.mp.dps = 60
r = {}
for l in range(3, 13):
    x = mp.factorial(l) * mp.e
    r[l] = x - mp.floor(x)
out["r3"] = r[3]
out["r12"] = r[12]
lam = {l: mp.cos(2 * mp.pi * r[l]) ** 2 for l in r}
out["C1_min"] = min(l * l * (1 - lam[l]) for l in range(3, 13))


def lit_coeff(l):
    m = mp.factorial(l)
    return m ** (-mp.mpf(3) / 2) * mp.log(m) ** (-2)


# p-power norms, lMax = 8, n = 1024
n = 1024
pn = mp.fsum(2 * lit_coeff(l) ** 2 * lam[l] ** (2 * n) for l in range(3, 9))
un_ = mp.fsum(2 * lit_coeff(l) ** 2 * mp.fsum(lam[l] ** k for k in range(1, n + 1)) ** 2 for l in range(3, 9))
out["pnorm_lmax8_1024"] = pn
out["pnorm_lmax8_16"] = mp.fsum(2 * lit_coeff(l) ** 2 * lam[l] ** 32 for l in range(3, 9))
out["unorm_lmax8_1024"] = un_

# sigma^2 and the stationary E[S_n^2]/n for lMax = 7
sig = mp.fsum(2 * lit_coeff(l) ** 2 * (1 + lam[l]) / (1 - lam[l]) for l in range(3, 8))
out["sigma_sq_lmax7"] = sig


def var_ratio(n):
    acc = mp.mpf(0)
    for l in range(3, 8):
        lm = lam[l]
        # sum_{j,k<=n} lm^{|j-k|} = n + 2 sum_{h=1}^{n-1} (n-h) lm^h
        s2 = n + 2 * (lm * (n - 1 - n * lm + lm**n)) / (1 - lm) ** 2
        acc += 2 * lit_coeff(l) ** 2 * s2
    return acc / n


out["var_ratio_lmax7_1e5"] = var_ratio(10**5)
out["var_ratio_lmax7_10"] = var_ratio(10)
mp.mp.dps = 40

# lacunary Theta constant: max_k k^{5/4} sum_{l>=k} l^{-9/4}
out["theta_lacunary_C"] = max(
    mp.power(k, mp.mpf(5) / 4) * mp.zeta(mp.mpf(9) / 4, k) for k in range(1, 200)
)
out["theta_lacunary_2pow3"] = mp.zeta(mp.mpf(9) / 4, 3)

# geometric(0.5) Wu remainder variance at n = 64 (exact infinite process)
rho = mp.mpf("0.5")
n = 64
out["wu_geometric_64"] = (
    mp.fsum(rho ** (2 * m) for m in range(1, n + 1)) + (1 - rho**n) ** 2 * rho**2 / (1 - rho**2)
) / (1 - rho) ** 2

# A(z) ratio for constant b on the radial path, 4c sqrt(pi) constant.
# B(z) = c sum_n z^n zeta(3/2, n)/n summed in double with scipy's Hurwitz zeta.
cd = float(c_const)
for eps in (1e-2, 1e-3, 1e-4):
    z = 1.0 - eps
    nmax = int(60 / eps)
    ns = np.arange(1, nmax + 1, dtype=np.float64)
    terms = np.exp(ns * math.log1p(-eps)) * special.zeta(1.5, ns) / ns
    B = cd * math.fsum(terms)
    A = 1.0 / (1.0 - B)
    out[f"propA1_const_ratio_{eps:g}"] = mp.mpf(A * 4 * cd * math.sqrt(math.pi) * math.sqrt(eps))

# dyadic measure sqrt-criterion terms 2^n sum_{j>=n} 2^-j (j <= 40) at n = 10
out["dyadic_term_10"] = mp.power(2, 10) * mp.fsum(mp.power(2, -j) for j in range(10, 41))

for k, v in out.items():
    print(f"{k} = {mp.nstr(v, 17)}")
