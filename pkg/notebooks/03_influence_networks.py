# %% [markdown]
# # Influence networks from opinion time series
#
# Simulate opinions on known graphs, recover directed influence networks
# with pairwise Granger tests, then regress log realized diversity on the
# spectral prediction of each recovered network.

# %%
from noisyop import experiments as ex

cfg = ex.preset("empirical")
cfg["panels"]["synthetic"].update(graphs=12, steps=1500)
rep = ex.empirical(cfg)
for row in rep["topics"].rows[:5]:
    print(row["topic"], row["n_sources"], "sources", row["n_edges"], "edges",
          f"predicted {row['predicted_d']:.3f}  true {row['true_predicted_d']:.3f}  y {row['y']:.3f}")

# %%
for name, fit in rep.fits.items():
    print(name, "R2", round(fit.r_squared, 3))
m2 = rep.fits["M2"]
j = m2.terms.index("d")
print("M2 slope", m2.coef[j], "p", m2.pvalues[j])
