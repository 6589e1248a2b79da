import numpy as np
from sklearn.metrics import adjusted_rand_score

from ..exceptions import DimensionError
from ..model import AdjacencyMatrix, MembershipVector, to_values


class EvalMetrics:

    def __init__(self, fdp: float, tdp: float, n_rejected: int) -> None:
        self.fdp = fdp
        self.tdp = tdp
        self.n_rejected = n_rejected


    def to_dict(self) -> dict:
        return dict(fdp=self.fdp, tdp=self.tdp, n_rejected=self.n_rejected)


    def __repr__(self) -> str:
        return f'EvalMetrics(fdp={self.fdp:.6g}, tdp={self.tdp:.6g}, n_rejected={self.n_rejected})'


def evaluate(decisions: np.ndarray, truth: AdjacencyMatrix) -> EvalMetrics:
    phi = to_values(decisions)
    a = to_values(truth)
    if phi.shape != a.shape:
        raise DimensionError(f"decisions {phi.shape} do not match truth {a.shape}")

    n_rejected = int(phi.sum())
    false_rejections = float(np.sum(phi * (1. - a)))
    true_rejections = float(np.sum(phi * a))
    return EvalMetrics(
        false_rejections / max(n_rejected, 1),
        true_rejections / max(float(a.sum()), 1.),
        n_rejected,
    )


def adjusted_rand_index(z_hat: MembershipVector, z_true: MembershipVector) -> float:
    if len(z_hat) != len(z_true):
        raise DimensionError(f"membership lengths differ: {len(z_hat)} vs {len(z_true)}")
    return float(adjusted_rand_score(z_true.labels, z_hat.labels))
