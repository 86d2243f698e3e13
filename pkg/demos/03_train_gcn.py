"""Training the Chebyshev GCN on a two-community graph.

Nodes carry one-hot identity features, so everything the network learns
about unlabelled nodes has to travel along edges. Only 20 of 100 nodes
are labelled.
"""

import numpy as np

from popgcn.gcn import GcnModel, forward, loss_and_grads, loss_value, predict, train
from popgcn.graph import spectral_operator
from popgcn.synth import gen_two_community_graph

W, labels = gen_two_community_graph(100, p_in=0.5, p_out=0.02, seed=0)
op = spectral_operator(W)
X = np.eye(100)
mask = np.zeros(100, dtype=bool)
mask[np.random.default_rng(0).choice(100, 20, replace=False)] = True

model = GcnModel(n_features=100, K=2, n_hidden_layers=1, hidden=16, dropout=0.5, epochs=200, seed=0)
print("receptive field: %d hops" % model.receptive_field)

# analytic gradients against a central difference on one weight
loss, grads = loss_and_grads(model, X, op, labels, mask)
theta = model.layers[0].theta
h = 1e-6
theta[1, 4, 2] += h
up = loss_value(model, forward(model, X, op)[0], labels, mask)
theta[1, 4, 2] -= 2 * h
down = loss_value(model, forward(model, X, op)[0], labels, mask)
theta[1, 4, 2] += h
print("gradient check: analytic %.3e, numeric %.3e" % (grads[0][1, 4, 2], (up - down) / (2 * h)))

model, state = train(model, X, op, labels, mask)
print("loss: first epoch %.3f, last epoch %.3f" % (state.history[0], state.history[-1]))
pred, _ = predict(model, X, op)
print("accuracy on unlabelled nodes: %.2f" % np.mean(pred[~mask] == labels[~mask]))
