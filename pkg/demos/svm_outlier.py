"""Four points in the plane, one of which drifts far from its class.

The 0/1 loss pays a flat price for a misclassified point however far away
it is, so the outlier (1, a) cannot drag the decision boundary. We train
for growing a and print the learned threshold on the first coordinate.
"""
import numpy as np

from nm01 import svm

for a in (1, 10, 100, 1000):
    data = svm.synthetic_outlier(a)
    model = svm.train(data)
    w1, bias = model.weights[0], model.bias
    print(f"a={a:>5}: x = {np.round(model.x, 4)}, boundary x1 = {-bias / w1:.4f}, "
          f"train accuracy {model.train_accuracy:.2f}, solver {model.report.status.value} "
          f"after {model.report.iterations} steps")
