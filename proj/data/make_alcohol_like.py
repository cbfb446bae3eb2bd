"""Generate alcohol_like.csv: a synthetic stand-in shaped like the drinking
diary data (89 subjects, count response, seven covariates).

The real data is not redistributed. Values here are drawn from a Poisson
log-linear model with the same main effects and the interactions
ROSN:PREL, AGE:ROSN, DESIRED:GENDER, DESIRED:AGE and STATE:NEGEVENT.
Rerunning the script reproduces the committed file byte for byte.
"""

import csv
import pathlib

import numpy as np

N = 89
rng = np.random.default_rng(20260101)

negevent = np.round(rng.gamma(2.0, 0.25, N), 3)
prel = np.round(rng.gamma(2.5, 0.9, N), 3)
age = rng.integers(21, 45, N)
rosn = np.round(np.clip(rng.normal(3.4, 0.45, N), 2.0, 4.0), 2)
state = np.round(np.clip(rng.normal(4.0, 0.6, N), 2.2, 5.0), 2)
gender = rng.integers(1, 3, N)
desired = np.round(np.clip(rng.normal(3.0, 1.1, N), 1.0, 5.0), 2)

# Centered covariates keep the interactions from swamping the intercept.
a, r, p, s, n_, d = age - 30, rosn - 3.4, prel - 2.2, state - 4.0, negevent - 0.5, desired - 3.0
g = gender - 1.5
eta = (1.45 + 0.12 * n_ - 0.05 * p - 0.01 * a - 0.25 * r - 0.15 * s - 0.10 * g + 0.22 * d
       + 0.20 * r * p + 0.03 * a * r + 0.10 * d * g - 0.01 * d * a - 0.30 * s * n_)
numall = rng.poisson(np.exp(eta))

out = pathlib.Path(__file__).with_name("alcohol_like.csv")
with out.open("w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["NUMALL", "NEGEVENT", "PREL", "AGE", "ROSN", "STATE", "GENDER", "DESIRED"])
    for row in zip(numall, negevent, prel, age, rosn, state, gender, desired):
        w.writerow([int(row[0])] + [f"{v:g}" for v in row[1:3]] + [int(row[3])]
                   + [f"{v:g}" for v in row[4:6]] + [int(row[6]), f"{row[7]:g}"])
