"""Least-squares fit of 1 / (1 + a x^(2b)) to the min_dist/spread target curve."""
import numpy as np
from scipy.optimize import curve_fit


def find_ab(spread, min_dist):
    xv = np.linspace(0, spread * 3, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    (a, b), _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2 * b)), xv, yv)
    return a, b


for spread, md in [(1.0, 0.0), (1.0, 0.1), (1.0, 0.5)]:
    a, b = find_ab(spread, md)
    print(f"spread={spread} min_dist={md}: a={a!r} b={b!r}")
