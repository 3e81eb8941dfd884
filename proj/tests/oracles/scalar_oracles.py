"""High-precision reference scalars (mpmath, 50 digits)."""
from mpmath import mp, mpf, log, exp, pi, e, sqrt

mp.dps = 50

print("logit(0.001), beta 1:", log(mpf("0.001") / mpf("0.999")))
print("logit(0.25), beta 2:", log(mpf("0.25") / (2 * mpf("0.75"))))
print("sigmoid(-6.90676), beta 1:", 1 / (1 + exp(mpf("6.90676"))))
print("sigmoid(3), beta 0.5:", mpf("0.5") * exp(3) / (1 + mpf("0.5") * exp(3)))
print("N(0,1) log peak:", -log(2 * pi) / 2)
print("N(0,1) entropy:", log(2 * pi * e) / 2)
print("silverman factor d=1 N=1000:", (mpf(4) / (3 * 1000)) ** (mpf(1) / 5))
print("scott factor d=2 N=500:", mpf(500) ** (-mpf(1) / 6))
phi = lambda x: exp(-x * x / 2) / sqrt(2 * pi)
print("mixture +-10 at x=10:", log(mpf("0.5") * phi(0) + mpf("0.5") * phi(20)))
print("zscore [[1,2],[3,4]] std:", sqrt(mpf("1.25")), "z0:", (1 - mpf("2.5")) / sqrt(mpf("1.25")),
      "z1:", (2 - mpf("2.5")) / sqrt(mpf("1.25")))
