"""Regenerate the golden fit fixture under tests/data.

Only rerun this after a deliberate, validated change to the estimator.
"""
import json
import os

from fscns import ComponentParams, EmConfig, MixtureParams, Weights, fit_fsc_ns, generate_dataset, make_rng
from fscns.dataio import write_dataset_csv

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "data")
PSI0 = MixtureParams(0.4, ComponentParams(0.0, 1.0), ComponentParams(3.5, 1.2))

data = generate_dataset(PSI0, 3, 20, 10, 200, rng=make_rng(7))
write_dataset_csv(data, os.path.join(HERE, "golden_k3_seed7.csv"))
fit = fit_fsc_ns(data, Weights(1.0, 1.0, 3.0), EmConfig())
p = fit.psi_hat
out = {
    "estimates": {"pi": p.pi, "mu1": p.comp1.mu, "sigma1": p.comp1.sigma,
                  "mu2": p.comp2.mu, "sigma2": p.comp2.sigma},
    "iterations": fit.iterations,
    "loglik": fit.loglik,
}
with open(os.path.join(HERE, "golden_k3_seed7.json"), "w") as fh:
    json.dump(out, fh, indent=2)
    fh.write("\n")
print(out)
