"""Closed-form constants attached to the truncated kinetic model.

Everything here is an explicit function of the model parameters: the cutoff
kernel pair (b0, lambda), weighted-norm rates tau > sigma > 0, the class
bounds (R, M), and the horizon T.  The derived numbers feed the inequality
verification suite, the positivity time-step guard of the scheme, and the
stability-window construction (rho, X0, T0, T*).

Each value is reproducible through a second, independent evaluation path in
high-precision arithmetic (crosscheck_report), so a report can certify itself
to 1e-12 relative.

Two quantities are constructive choices rather than pinned formulas: the
growth amplitude inside the stability envelope C(x) (any upper bound keeps
the envelope valid, we use k1 * (2 + d1) * max(1, 1/(c_sigma R))), and the
window size rho, picked by golden-section search to maximize rho / C(R + rho)
(the maximizer has the closed form 1/(c_sigma T), which the tests use as an
oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .errors import ConfigurationError
from .kernels import gauss_pi

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigurationError(msg)


# ---------------------------------------------------------------------------
# cutoff-kernel constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffConstants:
    b_lambda: float
    c_tau: float       # 2 pi^{3/2} PI(-lam/2) tau^{-(3-lam)/2} b0
    g_bound: float     # pi^{3/2} PI(-lam/2) tau^{-(3-lam)/2}


def cutoff_constants(b0: float, lam: float, tau: float) -> CutoffConstants:
    _check(b0 > 0, f"b0 must be > 0 for cutoff constants, got {b0}")
    _check(0.0 <= lam < 2.0, f"lambda must lie in [0, 2), got {lam}")
    _check(tau > 0, f"tau must be > 0, got {tau}")
    pi_fac = gauss_pi(-lam / 2.0)
    g_bound = math.pi ** 1.5 * pi_fac * tau ** (-(3.0 - lam) / 2.0)
    return CutoffConstants(pi_fac * b0, 2.0 * g_bound * b0, g_bound)


# ---------------------------------------------------------------------------
# splitting-defect constants k_{i,j}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplittingDefectConstants:
    k12: float
    k22: float
    k13: float
    k23: float
    k14: float
    k24: float
    k15: float
    k25: float
    k1: float
    k2: float
    r_star: float     # class bound of the collided field: c_tau R^2
    m_star: float     # its translation Lipschitz bound: c_tau M (2R + M)


def splitting_defect_constants(R: float, M: float, tau: float, sigma: float,
                        b0: float, lam: float) -> SplittingDefectConstants:
    _check(R > 0 and M > 0, f"R, M must be > 0, got ({R}, {M})")
    _check(0.0 < sigma < tau, f"need 0 < sigma < tau, got ({sigma}, {tau})")
    gc_tau = cutoff_constants(b0, lam, tau)
    gc_sigma = cutoff_constants(b0, lam, sigma)
    bl = gc_tau.b_lambda
    rm = max(R, M)
    rm4 = max(R * R, M * (2.0 * R + M))
    sqrt_gap = (tau - sigma) ** -0.5
    k12 = (2.0 ** 2.5 * math.pi ** 1.5 * math.exp(-0.5) * bl
           * sqrt_gap * sigma ** (-(3.0 - lam) / 2.0) * R * rm)
    k22 = ((2.0 * math.pi) ** 4 * bl * tau ** -3.5
           * sigma ** (-(3.0 - lam) / 2.0) * R * rm)
    k13 = gc_sigma.c_tau * M * R
    k23 = 2.0 * math.pi ** 4.5 * bl * tau ** (-(9.0 - lam) / 2.0) * M * R
    k14 = (2.0 ** 1.5 * math.exp(-0.5) * math.pi ** 1.5 * bl
           * tau ** (-(3.0 - lam) / 2.0) * sqrt_gap * rm4)
    k24 = 8.0 * math.pi ** 4 * bl * tau ** (-(10.0 - lam) / 2.0) * rm4
    k15 = 2.0 * gc_sigma.c_tau * R
    return SplittingDefectConstants(
        k12, k22, k13, k23, k14, k24, k15, k15,
        max(k12, k13, k14, k15), max(k22, k23, k24, k15),
        gc_tau.c_tau * R * R, gc_tau.c_tau * M * (2.0 * R + M))


def time_lipschitz_constants(R: float, M: float, tau: float, sigma: float,
                             b0: float, lam: float):
    """(d1, d2): time-Lipschitz moduli of a bounded-class solution flow."""
    _check(0.0 < sigma < tau, f"need 0 < sigma < tau, got ({sigma}, {tau})")
    c_sigma = cutoff_constants(b0, lam, sigma).c_tau
    rm = max(R, M)
    d1 = math.sqrt(2.0) * math.exp(-0.5) * (tau - sigma) ** -0.5 * rm \
        + c_sigma * R * R
    d2 = 4.0 * math.pi ** 2.5 * tau ** -3.5 * rm \
        + c_sigma * (math.pi / sigma) ** 3 * R * R
    return d1, d2


# ---------------------------------------------------------------------------
# stability window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityThresholds:
    gronwall_k: float
    c_prefactor: float     # gronwall_k / (c_sigma R)
    c_rate: float          # c_sigma T
    r_shift: float         # the R the envelope is anchored at
    rho_star: float
    c_at_window: float     # C(R + rho_star)
    x0: float
    t0: float
    d0: float
    t_star: float
    fallback_used: bool

    def envelope(self, x: float) -> float:
        """The growth envelope C(x), strictly increasing in x."""
        return self.c_prefactor * math.exp(self.c_rate * (x + self.r_shift))


def _golden_max(fn, lo: float, hi: float, iters: int = 200):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
        if b - a < 1e-14 * max(1.0, abs(b)):
            break
    return (c, fc) if fc >= fd else (d, fd)


def stability_thresholds(R: float, M: float, T: float, tau: float,
                         sigma: float, b0: float, lam: float) -> StabilityThresholds:
    """Window (rho, X0, T0) and the positivity bound D0, T*.

    C(x) = k / (c_sigma R) * exp(c_sigma T (x + R)); rho maximizes
    rho / C(R + rho) subject to rho / C(R + rho) < min(1, T); then
    X0 = T0 = half the maximized value, D0 = c_sigma (R + rho) / 2 and
    T* = min(T0, 1/D0, 1, T).
    """
    _check(R > 0 and M > 0 and T > 0, "R, M, T must be positive")
    _check(0.0 < sigma < tau, f"need 0 < sigma < tau, got ({sigma}, {tau})")
    c_sigma = cutoff_constants(b0, lam, sigma).c_tau
    key = splitting_defect_constants(R, M, tau, sigma, b0, lam)
    d1, _ = time_lipschitz_constants(R, M, tau, sigma, b0, lam)
    k = key.k1 * (2.0 + d1) * max(1.0, 1.0 / (c_sigma * R))
    pref = k / (c_sigma * R)
    rate = c_sigma * T

    def c_of(x):
        return pref * math.exp(rate * (x + R))

    def q_of(rho):
        return rho / c_of(R + rho)

    cap = min(1.0, T)
    rho_hi = 10.0 / rate
    rho_star, q_star = _golden_max(q_of, 1e-12 * rho_hi, rho_hi)
    fallback = False
    if not (q_star > 0 and math.isfinite(q_star)):
        rho_star, q_star = R, q_of(R)
        fallback = True
    if q_star >= cap:
        # shrink along the increasing left branch until the window fits
        lo, hi = 0.0, rho_star
        target = 0.999 * cap
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if q_of(mid) < target:
                lo = mid
            else:
                hi = mid
        rho_star = lo
        q_star = q_of(rho_star)
    c_window = c_of(R + rho_star)
    # the printed chain C(R+rho)(T0+X0) <= rho must hold in floats too
    while c_window * q_star > rho_star:
        q_star = math.nextafter(q_star, 0.0)
    x0 = 0.5 * q_star
    t0 = q_star - x0
    d0 = 0.5 * c_sigma * (R + rho_star)
    t_star = min(t0, 1.0 / d0, 1.0, T)
    return StabilityThresholds(k, pref, rate, R, rho_star, c_window,
                               x0, t0, d0, t_star, fallback)


def translate_decay(T: float, tau1: float) -> float:
    """Largest rate theta < tau1 with exp(-tau1((x-tv)^2+v^2)) <=
    exp(-theta(x^2+v^2)) for all |t| <= T: tau1 times the minimal eigenvalue
    of the comoving quadratic form, ((2+T^2) - sqrt(T^4+4T^2)) / 2."""
    _check(T >= 0, f"horizon must be >= 0, got {T}")
    _check(tau1 > 0, f"tau1 must be > 0, got {tau1}")
    lam_min = ((2.0 + T * T) - math.sqrt(T ** 4 + 4.0 * T * T)) / 2.0
    return tau1 * lam_min


def spatial_lipschitz_constant(M0: float, R: float, T: float, tau_star: float,
                               tau1: float, b0: float, lam: float) -> float:
    """Propagated translation-Lipschitz bound of the solution class."""
    _check(M0 > 0 and R > 0 and T >= 0, "M0, R must be > 0 and T >= 0")
    _check(0.0 < tau1 < tau_star,
           f"need 0 < tau1 < tau_star, got ({tau1}, {tau_star})")
    c_tau1 = cutoff_constants(b0, lam, tau1).c_tau
    grow = math.exp(2.0 * c_tau1 * R * T) - 1.0
    bulge = 1.0 + math.exp(tau_star ** 2 / (tau_star - tau1))
    return M0 * (1.0 + 0.5 * grow * bulge)


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsReport:
    # inputs
    R: float
    M: float
    T: float
    tau: float
    sigma: float
    tau1: float
    tau_star: float
    M0: float
    b0: float
    lam: float
    # kernel constants
    b_lambda: float
    c_tau: float
    c_sigma: float
    g_bound_tau: float
    g_bound_sigma: float
    # splitting-defect constants
    k12: float
    k22: float
    k13: float
    k23: float
    k14: float
    k24: float
    k15: float
    k25: float
    k1: float
    k2: float
    r_star: float
    m_star: float
    # time Lipschitz
    d1: float
    d2: float
    # stability window
    gronwall_k: float
    rho_star: float
    c_at_window: float
    x0: float
    t0: float
    d0: float
    t_star: float
    window_fallback: bool
    # translation decay and propagated Lipschitz bound
    theta: float
    m_propagated: float
    # assembled first-order error constants (upper bounds only): the
    # one-step recursion uses growth rate k1_tilde and source k2_tilde,
    # giving sup-in-time L1 error <= conv_k1 * dt + conv_k2 * dx
    k1_tilde: float = 0.0
    k2_tilde: float = 0.0
    conv_k: float = 0.0
    conv_k1: float = 0.0
    conv_k2: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def compute_report(R, M, T, tau, sigma, b0, lam,
                   tau1=None, tau_star=None, M0=None) -> ConstantsReport:
    if tau_star is None:
        tau_star = tau
    if tau1 is None:
        tau1 = sigma
    if M0 is None:
        M0 = M
    gc_tau = cutoff_constants(b0, lam, tau)
    gc_sigma = cutoff_constants(b0, lam, sigma)
    key = splitting_defect_constants(R, M, tau, sigma, b0, lam)
    d1, d2 = time_lipschitz_constants(R, M, tau, sigma, b0, lam)
    st = stability_thresholds(R, M, T, tau, sigma, b0, lam)
    theta = translate_decay(T, tau1)
    m_prop = spatial_lipschitz_constant(M0, R, T, tau_star, tau1, b0, lam)
    k1t = gc_sigma.c_tau * (2.0 * R + st.rho_star)
    k2t = key.k2 * (2.0 + d2)
    # upper bound only; may overflow to inf for strongly coupled classes
    log_k = math.log(k2t) - math.log(k1t) + k1t * T
    conv_k = math.exp(log_k) if log_k < 709.0 else math.inf
    return ConstantsReport(
        R=R, M=M, T=T, tau=tau, sigma=sigma, tau1=tau1, tau_star=tau_star,
        M0=M0, b0=b0, lam=lam,
        b_lambda=gc_tau.b_lambda, c_tau=gc_tau.c_tau, c_sigma=gc_sigma.c_tau,
        g_bound_tau=gc_tau.g_bound, g_bound_sigma=gc_sigma.g_bound,
        k12=key.k12, k22=key.k22, k13=key.k13, k23=key.k23, k14=key.k14,
        k24=key.k24, k15=key.k15, k25=key.k25, k1=key.k1, k2=key.k2,
        r_star=key.r_star, m_star=key.m_star,
        d1=d1, d2=d2,
        gronwall_k=st.gronwall_k, rho_star=st.rho_star,
        c_at_window=st.c_at_window, x0=st.x0, t0=st.t0, d0=st.d0,
        t_star=st.t_star, window_fallback=st.fallback_used,
        theta=theta, m_propagated=m_prop,
        k1_tilde=k1t, k2_tilde=k2t, conv_k=conv_k,
        conv_k1=d2 + conv_k, conv_k2=conv_k)


# ---------------------------------------------------------------------------
# independent high-precision evaluation path
# ---------------------------------------------------------------------------

def crosscheck_report(report: ConstantsReport, dps: int = 40):
    """Re-derive every derived entry with mpmath and compare.

    The window size rho_star is search-produced, so it is taken as given and
    the chain built on it (C, X0, T0, D0, T*) is re-evaluated.  Returns
    (max relative deviation, per-entry deviations).
    """
    import mpmath as mp

    with mp.workdps(dps):
        R = mp.mpf(repr(report.R))
        M = mp.mpf(repr(report.M))
        T = mp.mpf(repr(report.T))
        tau = mp.mpf(repr(report.tau))
        sigma = mp.mpf(repr(report.sigma))
        tau1 = mp.mpf(repr(report.tau1))
        tau_star = mp.mpf(repr(report.tau_star))
        M0 = mp.mpf(repr(report.M0))
        b0 = mp.mpf(repr(report.b0))
        lam = mp.mpf(repr(report.lam))
        rho = mp.mpf(repr(report.rho_star))
        pi = mp.pi

        def pifn(z):
            return mp.gamma(z + 1)

        def gb(t):
            return pi ** mp.mpf("1.5") * pifn(-lam / 2) * t ** (-(3 - lam) / 2)

        bl = pifn(-lam / 2) * b0
        c_tau = 2 * gb(tau) * b0
        c_sigma = 2 * gb(sigma) * b0
        rm = mp.mpf(max(report.R, report.M))
        rm4 = max(R * R, M * (2 * R + M))
        gap = (tau - sigma) ** mp.mpf("-0.5")
        e_half = mp.exp(mp.mpf("-0.5"))
        k12 = 2 ** mp.mpf("2.5") * pi ** mp.mpf("1.5") * e_half * bl * gap \
            * sigma ** (-(3 - lam) / 2) * R * rm
        k22 = (2 * pi) ** 4 * bl * tau ** mp.mpf("-3.5") \
            * sigma ** (-(3 - lam) / 2) * R * rm
        k13 = c_sigma * M * R
        k23 = 2 * pi ** mp.mpf("4.5") * bl * tau ** (-(9 - lam) / 2) * M * R
        k14 = 2 ** mp.mpf("1.5") * e_half * pi ** mp.mpf("1.5") * bl \
            * tau ** (-(3 - lam) / 2) * gap * rm4
        k24 = 8 * pi ** 4 * bl * tau ** (-(10 - lam) / 2) * rm4
        k15 = 2 * c_sigma * R
        k1 = max(k12, k13, k14, k15)
        k2 = max(k22, k23, k24, k15)
        d1 = mp.sqrt(2) * e_half * gap * rm + c_sigma * R * R
        d2 = 4 * pi ** mp.mpf("2.5") * tau ** mp.mpf("-3.5") * rm \
            + c_sigma * (pi / sigma) ** 3 * R * R
        k_gron = k1 * (2 + d1) * max(mp.mpf(1), 1 / (c_sigma * R))
        c_window = k_gron / (c_sigma * R) * mp.exp(c_sigma * T * (2 * R + rho))
        q = rho / c_window
        x0 = q / 2
        t0 = q - x0
        d0 = c_sigma * (R + rho) / 2
        t_star = min(t0, 1 / d0, mp.mpf(1), T)
        lam_min = ((2 + T * T) - mp.sqrt(T ** 4 + 4 * T * T)) / 2
        theta = tau1 * lam_min
        m_prop = M0 * (1 + (mp.exp(2 * (2 * gb(tau1) * b0) * R * T) - 1) / 2
                       * (1 + mp.exp(tau_star ** 2 / (tau_star - tau1))))
        k1t = c_sigma * (2 * R + rho)
        k2t = k2 * (2 + d2)
        conv_k = k2t / k1t * mp.exp(k1t * T)

        expected = {
            "b_lambda": bl, "c_tau": c_tau, "c_sigma": c_sigma,
            "g_bound_tau": gb(tau), "g_bound_sigma": gb(sigma),
            "k12": k12, "k22": k22, "k13": k13, "k23": k23,
            "k14": k14, "k24": k24, "k15": k15, "k25": k15,
            "k1": k1, "k2": k2,
            "r_star": c_tau * R * R, "m_star": c_tau * M * (2 * R + M),
            "d1": d1, "d2": d2,
            "gronwall_k": k_gron, "c_at_window": c_window,
            "x0": x0, "t0": t0, "d0": d0, "t_star": t_star,
            "theta": theta, "m_propagated": m_prop,
            "k1_tilde": k1t, "k2_tilde": k2t, "conv_k": conv_k,
            "conv_k1": d2 + conv_k, "conv_k2": conv_k,
        }
        max_float = mp.mpf(repr(1.7976931348623157e308))
        devs = {}
        for name, precise in expected.items():
            fast = getattr(report, name)
            if math.isinf(fast):
                # overflowed upper bound: consistent iff the precise value
                # also exceeds the float range
                devs[name] = 0.0 if precise > max_float else math.inf
                continue
            scale = max(abs(precise), mp.mpf("1e-300"))
            devs[name] = float(abs(mp.mpf(repr(fast)) - precise) / scale)
    return max(devs.values()), devs
