# # Two baselines on the same instance
#
# Unweighted row nearest neighbors (RowNN) averages every row within a
# radius; its radius is picked on a random holdout of observed cells.
# USVT is a spectral method: zero-fill, keep the large singular values,
# rescale by the observation rate.

from awnn import (RowNNConfig, SyntheticSpec, awnn_fit, generate, mse, rownn_impute, rownn_tune,
                  usvt_impute)

inst = generate(SyntheticSpec(n=160, m=160, lam=0.75, snr=2.0, p=0.65, seed=5))

fit = awnn_fit(inst.data)
cfg = RowNNConfig(seed=5)
eta2 = rownn_tune(inst.data, cfg, sigma2=fit.sigma2_hat)
print(f"tuned RowNN radius eta^2 = {eta2:.4g}")

rows = {
    "awnn": fit.theta_hat,
    "rownn": rownn_impute(inst.data, fit.sigma2_hat, eta2, cfg),
    "usvt": usvt_impute(inst.data),
}
for name, est in rows.items():
    print(f"{name:>6}  MSE {mse(est, inst.theta)[0]:.5f}")
