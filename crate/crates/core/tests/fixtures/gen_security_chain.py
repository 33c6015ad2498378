"""Independent 50-digit evaluation of the security parameter chain.

Run: python3 gen_security_chain.py > security_chain.json
"""
import json

from mpmath import mp, mpf, sqrt, exp, log, nstr

mp.dps = 50

CASES = [
    {"n": 100000, "epsilon": "0", "delta": "1e-8", "mu1": "5e-4", "kappa": "1e-4"},
    {"n": 20000, "epsilon": "0.1", "delta": "5e-8", "mu1": "0.5", "kappa": "0.1"},
    {"n": 10000000, "epsilon": "0.05", "delta": "1e-9", "mu1": "0.01", "kappa": "0.001"},
    {"n": 5000, "epsilon": "0.2", "delta": "1e-10", "mu1": "0.2", "kappa": "0.05"},
]


def chain(c):
    n = mpf(c["n"])
    eps, delta, mu1, kappa = (mpf(c[k]) for k in ("epsilon", "delta", "mu1", "kappa"))
    mu2 = 1 - sqrt(2 * delta)
    mu3 = (mu1 - 2 * kappa) / (2 * (1 - kappa))
    mu4 = mu2 + mu3 - 1
    gamma = max(1 - kappa, (3 + 2 * sqrt(2 * delta) / (mpf(1) / 2 - eps) ** 8) / 4)
    eps_az1 = 2 * exp(-n * delta**2 / 4)
    eps_az2 = 2 * exp(-n * mu1**2 / 16)
    delta1 = 2 * (eps_az1 + eps_az2) + gamma ** (mu4 * n)
    entropy = mu4 * n * log(1 / gamma, 2)
    vals = dict(mu2=mu2, mu3=mu3, mu4=mu4, gamma=gamma, eps_az1=eps_az1,
                eps_az2=eps_az2, delta1=delta1, min_entropy_bits=entropy)
    return {k: nstr(v, 30) for k, v in vals.items()}


print(json.dumps([{"params": c, "expected": chain(c)} for c in CASES], indent=2))
