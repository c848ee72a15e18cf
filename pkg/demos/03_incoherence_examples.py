"""The worked incoherence examples: which matrices are easy to recover.

The three constants translate a matrix's "spikiness" into sample
complexity. The all-ones matrix is maximally benign (all constants 1); the
single-zero matrix shows that similarity and column-factor recovery can be
easy while exact rowspace recovery is hopeless (mu2 blows up); power-law
correlated factors are easier than flat ones.
"""

import numpy as np

from onesided import (
    gen_correlated,
    gen_gaussian,
    gen_special,
    incoherence,
    make_rng,
    power_law_spectrum,
    theory_rate,
)

print("matrix                          mu1      mu2      mu3")

gt = gen_special("all_ones", 200, 10)
mus = incoherence(gt.theta_star, 1)
print(f"all ones (d=10)            {mus[0]:>8.2f} {mus[1]:>8.2f} {mus[2]:>8.2f}")

gt = gen_special("single_zero", 200, 10)
mus = incoherence(gt.theta_star, 2)
print(f"single zero (d=10)         {mus[0]:>8.2f} {mus[1]:>8.2f} {mus[2]:>8.2f}")

rng = make_rng(0)
gt = gen_gaussian(100_000, 100, 4, rng)
mus = incoherence(gt.theta_star, 4)
print(f"gaussian r=4 (d=100)       {mus[0]:>8.2f} {mus[1]:>8.2f} {mus[2]:>8.2f}")

# mu1's numerator is a max statistic, so compare spectra on seed averages
r = 16
flats, decays = [], []
for seed in range(6):
    flat = gen_correlated(20_000, 60, r, np.ones(r), make_rng(seed))
    decay = gen_correlated(20_000, 60, r, power_law_spectrum(r, 2.0), make_rng(seed))
    flats.append(incoherence(flat.theta_star, r)[0])
    decays.append(incoherence(decay.theta_star, r)[0])
print(f"correlated r=16 flat       {np.mean(flats):>8.2f}   (mean of 6 draws)")
print(f"correlated r=16 power-law  {np.mean(decays):>8.2f}   (decaying spectrum is easier)")

print("\ntheoretical rate alpha^2 r d (log d + delta) / m, alpha=1, delta=log d:")
for m in (10_000, 100_000, 1_000_000):
    print(f"  d=100 r=4 m={m:>9,}: {theory_rate(1.0, 4, 100, m, np.log(100)):.5f}")
