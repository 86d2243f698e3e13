"""Population graph from phenotypic measures.

Each pair of samples is connected with weight Sim(v, w) times the number of
measures on which they agree: same site, same gender, ages within theta.
Two similarity kernels are shown: feature correlation and the longitudinal
weight that ties repeated scans of one subject together.
"""

import numpy as np

from popgcn.graph import density, to_edges
from popgcn.population import MeasureSpec, SimSpec, build_population_graph
from popgcn.synth import gen_population

ds = gen_population(n_subjects=8, samples_per_subject_range=(1, 3), C=20, n_sites=2, seed=3)
for i in range(len(ds)):
    print(ds.sample_ids[i], ds.measures["site"][i], ds.measures["gender"][i], ds.measures["age"][i])

specs = [MeasureSpec("site", "categorical"), MeasureSpec("gender", "categorical")]
W = build_population_graph(ds, specs, SimSpec("correlation", sigma="auto"))
print("\ncorrelation kernel: %d edges, density %.2f" % (W.nnz // 2, density(W)))
r, c, w = to_edges(W)
for k in range(5):
    print("  %s -- %s  %.3f" % (ds.sample_ids[r[k]], ds.sample_ids[c[k]], w[k]))

# longitudinal weighting: same-subject pairs get lambda, others 1
specs = [MeasureSpec("gender", "categorical"), MeasureSpec("age", "quantitative", 2.0)]
W = build_population_graph(ds, specs, SimSpec("longitudinal", lam=10.0)).toarray()
same = np.array([[a == b for b in ds.subject_ids] for a in ds.subject_ids]) & ~np.eye(len(ds), dtype=bool)
print("\nlongitudinal kernel, mean weight within subject %.1f, across subjects %.2f"
      % (W[same].mean(), W[~same & (W > 0)].mean()))
