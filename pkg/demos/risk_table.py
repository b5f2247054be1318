"""Forecasts and a Monte Carlo exceedance table with the 24h Okhotsk / West Pacific fit.

    python3 demos/risk_table.py
"""
import numpy as np

from minar.experiments import OKHOTSK_WEST_PACIFIC
from minar.forecast import forecast, mc_tail_table

fit = OKHOTSK_WEST_PACIFIC[24]
P, innov = fit["P"], fit["innov"]

for r in forecast(P, innov, [1, 3], [1, 2, 7]):
    sd = np.sqrt(np.diag(r.cov))
    print(f"h={r.horizon}: mean {r.mean.round(4)}  sd {sd.round(4)}")

table = mc_tail_table(P, innov, N0=[23, 46], horizons=[1, 3, 7, 14, 30],
                      thresholds=[5, 10, 15, 20, 25, 30, 40, 50], paths=100_000, rng=0)
print()
print("P(total count over T days >= n | N0 = (23, 46))")
print(table.format())
