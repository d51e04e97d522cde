"""Closed-form and enumeration oracles for the acceptance and unit tests.

Independent of the C++ code: uses scipy for the normal CDF and plain
enumeration over correctness cases. Run it to regenerate the constants that
are frozen in tests/acceptance/acceptance.cpp and tests/unit/*.
"""
import itertools
import math

from scipy.stats import norm

CONF_BASE, CONF_SCALE, CONF_NOISE = 0.5, 0.15, 0.15
T_LOW, T_HIGH = 1 / 3, 2 / 3


def adoption_s1(alpha, a, s1, k):
    # enumerate machine right/wrong x fast solo right/wrong
    total = 0.0
    for m_ok, h_ok in itertools.product([True, False], repeat=2):
        p = (a if m_ok else 1 - a) * (s1 if h_ok else 1 - s1)
        if m_ok and h_ok:
            same = 1.0
        elif m_ok != h_ok:
            same = 0.0
        else:
            same = 1 / (k - 1)  # two wrong picks coincide (k=2: always)
        total += p * (alpha + (1 - alpha) * same)
    return total


def adoption_s2(tau, a, s, k):
    total = 0.0
    for m_ok, h_ok in itertools.product([True, False], repeat=2):
        p = (a if m_ok else 1 - a) * (s if h_ok else 1 - s)
        if m_ok and h_ok:
            same = 1.0
        elif m_ok != h_ok:
            same = 0.0
        else:
            same = 1 / (k - 1)
        total += p * (same + (1 - same) * tau)
    return total


def acc_s1(alpha, q, s1):
    return alpha * q + (1 - alpha) * s1


def acc_s2(tau, q, s):
    # initial right & machine right, or split with trust going the right way
    return s * q + s * (1 - q) * (1 - tau) + (1 - s) * q * tau


def p_bin(correct, calibration=1.0):
    mu = CONF_BASE + CONF_SCALE * calibration * (1 if correct else -1)
    lo = norm.cdf((T_LOW - mu) / CONF_NOISE)
    hi = 1 - norm.cdf((T_HIGH - mu) / CONF_NOISE)
    return {"low": lo, "medium": 1 - lo - hi, "high": hi}


def mixture_quality(a, s, s1, alpha, tau):
    pc, pw = p_bin(True), p_bin(False)
    table = {"low": "s2", "medium": "s1", "high": "machine"}
    out = 0.0
    for b, m in table.items():
        pb = a * pc[b] + (1 - a) * pw[b]
        q = a * pc[b] / pb
        acc = {"s2": acc_s2(tau, q, s), "s1": acc_s1(alpha, q, s1), "machine": q}[m]
        out += pb * acc
    return out


def pooled_z(hc, hn, mc, mn):
    ph, pm = hc / hn, mc / mn
    p = (hc + mc) / (hn + mn)
    var = p * (1 - p) * (1 / hn + 1 / mn)
    return 0.0 if var == 0 else (pm - ph) / math.sqrt(var)


TABLES = [
    (5, 10, 6, 10), (30, 50, 40, 50), (25, 50, 35, 50), (20, 50, 29, 50),
    (20, 50, 30, 50), (45, 50, 40, 50), (10, 10, 10, 10), (0, 10, 0, 10),
    (0, 10, 10, 10), (12, 40, 20, 40), (33, 60, 45, 60), (50, 100, 62, 100),
    (50, 100, 61, 100), (7, 20, 14, 20), (8, 20, 14, 20), (30, 30, 29, 30),
    (15, 25, 22, 40), (100, 200, 115, 200), (100, 200, 118, 200), (3, 12, 9, 15),
]


if __name__ == "__main__":
    crit = norm.ppf(0.95)
    print(f"critical z(0.05) = {crit:.12f}")
    s1a = adoption_s1(0.9, 0.8, 0.6, 2)
    s2a = adoption_s2(0.3, 0.8, 0.6, 2)
    print(f"anchoring: adoption s1={s1a:.6f} s2={s2a:.6f} effect={s1a - s2a:.6f}")
    print(f"S2 accuracy tau=.5 s=.6 a=.8: {acc_s2(0.5, 0.8, 0.6):.6f}")
    print(f"S1 accuracy alpha=.5 a=.8 s1=.6: {acc_s1(0.5, 0.8, 0.6):.6f}")
    print(f"deviation alpha=0 deviation: {1 - adoption_s1(0.0, 0.8, 0.6, 2):.6f}")
    print(f"learn 10 exposures: {0.9 - 0.4 * 0.9 ** 10:.10f}")
    for b in ("low", "medium", "high"):
        print(f"P({b}|correct)={p_bin(True)[b]:.6f} P({b}|wrong)={p_bin(False)[b]:.6f}")
    mix = mixture_quality(a=0.85, s=0.6, s1=0.55, alpha=0.8, tau=0.5)
    print(f"mixture (a=.85 s=.6 s1=.55 alpha=.8 tau=.5): {mix:.6f}")
    for t in TABLES:
        z = pooled_z(*t)
        print(f"{t}: z={z:.9f} machine_better={z > crit}")


def clamped_normal_mean(mu, sigma):
    # E[clamp(X, 0, 1)] for X ~ N(mu, sigma^2)
    a, b = (0 - mu) / sigma, (1 - mu) / sigma
    inside = mu * (norm.cdf(b) - norm.cdf(a)) + sigma * (norm.pdf(a) - norm.pdf(b))
    return inside + (1 - norm.cdf(b))


if __name__ == "__main__":
    hi = clamped_normal_mean(CONF_BASE + CONF_SCALE * 2, CONF_NOISE)
    lo = clamped_normal_mean(CONF_BASE - CONF_SCALE * 2, CONF_NOISE)
    print(f"solver kappa=2 mean confidence correct={hi:.6f} wrong={lo:.6f} margin={hi - lo:.6f}")
    mix = mixture_quality(a=0.8, s=0.6, s1=0.55, alpha=0.9, tau=0.5)
    print(f"harness example mixture (a=.8 s=.6 s1=.55 alpha=.9 tau=.5): {mix:.6f}")
    e = adoption_s1(0.8, 0.8, 0.6, 2) - adoption_s2(0.4, 0.8, 0.6, 2)
    print(f"anchoring alpha=.8 tau=.4 (a=.8 s=s1=.6): {e:.6f}")
