"""
Imposed nomination sampling on the breast cancer data
=====================================================

Sets of k records are formed without replacement, radius_worst picks the
nominee and log(area_worst) is what we keep.  Malignant is component 1.

Set FSCNS_DATA_DIR to the folder holding wdbc.data if it is not in data/.
"""

from fscns.wdbc import WdbcConfig, load_wdbc, run_wdbc

records = load_wdbc()
cfg = WdbcConfig(ks=(4,), w3s=(0.0, 2.0, 4.0), B=20, seed=2025)

print(f"{'w3':>4} {'method':8s} {'ARI':>7} {'AUC':>7} {'pi':>6} {'iters':>6}")
for row in run_wdbc(cfg, records):
    print(f"{row['w3']:4.0f} {row['method']:8s} {row['ari']:7.3f} {row['auc']:7.3f} "
          f"{row['pi_hat']:6.3f} {row['iterations']:6.1f}")
