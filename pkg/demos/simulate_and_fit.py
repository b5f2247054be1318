"""Simulate a BINAR(1) series, fit the five-model ladder and run the Granger tests.

    python3 demos/simulate_and_fit.py
"""
from minar.experiments import SET_1, run_model_ladder
from minar.inference import granger_tests
from minar.moments import moments_report
from minar.process import simulate_minar

P, innov = SET_1["P"], SET_1["innov"]
series = simulate_minar(P, innov, N0=[9, 7], steps=5000, rng=1)

print("model-implied moments")
for k, v in moments_report(P, innov.mean, innov.cov).items():
    print(f"  {k:<18s} {v:8.4f}")
print("sample means", series.counts.mean(axis=0).round(4))

ladder = run_model_ladder(series)
print()
print(ladder.fits["full-binar"].summary())
print()
print(ladder.to_csv())

report = granger_tests(series)
print("classification:", report.classification)
