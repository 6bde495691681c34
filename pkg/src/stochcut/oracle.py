"""Monte-Carlo ground truth: sample networks, cut them, average the damage."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CircularCut, classify_links
from .model import ConcreteNetwork, StochasticNetworkModel


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    per_type_means: tuple[float, float, float]
    per_type_std_errors: tuple[float, float, float]

    def as_dict(self):
        return {
            "mean": self.mean, "std_error": self.std_error, "n_samples": self.n_samples,
            "alpha": self.per_type_means[0], "beta": self.per_type_means[1],
            "gamma": self.per_type_means[2],
            "alpha_se": self.per_type_std_errors[0], "beta_se": self.per_type_std_errors[1],
            "gamma_se": self.per_type_std_errors[2],
        }


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream for sample ``index`` under master ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def pair_class_counts(net: ConcreteNetwork, cut: CircularCut) -> tuple[int, int, int, int]:
    """(n_alpha, n_beta, n_gamma, n_untouched) over the links of ``net``."""
    if net.n_links == 0:
        return (0, 0, 0, 0)
    codes = _codes(net, cut)
    counts = np.bincount(codes, minlength=4)
    return tuple(int(c) for c in counts)


def _codes(net, cut):
    u = net.nodes[net.links[:, 0]]
    v = net.nodes[net.links[:, 1]]
    return classify_links(u, v, cut.center, cut.radius)


def damage_by_class(net: ConcreteNetwork, cut: CircularCut) -> np.ndarray:
    """Capacity destroyed by ``cut`` as [alpha, beta, gamma]."""
    if net.n_links == 0:
        return np.zeros(3)
    codes = _codes(net, cut)
    return np.bincount(codes, weights=net.capacities, minlength=4)[:3]


def sample_records(model: StochasticNetworkModel, cut: CircularCut, n_samples: int, seed: int):
    """Per-sample damage, shape (n_samples, 3), sample ``k`` drawn from stream ``k``."""
    out = np.empty((n_samples, 3))
    for k in range(n_samples):
        net = model.sample_network(seed, rng=sample_stream(seed, k))
        out[k] = damage_by_class(net, cut)
    return out


def summarize(records: np.ndarray) -> McEstimate:
    n = len(records)
    if n < 2:
        raise ValueError("need at least two samples")
    totals = records.sum(axis=1)
    se = totals.std(ddof=1) / math.sqrt(n)
    per_mean = records.mean(axis=0)
    per_se = records.std(axis=0, ddof=1) / math.sqrt(n)
    return McEstimate(float(per_mean.sum()), float(se), n,
                      tuple(float(x) for x in per_mean), tuple(float(x) for x in per_se))


def empirical_tec(model: StochasticNetworkModel, cut: CircularCut, n_samples: int,
                  seed: int) -> McEstimate:
    """Mean capacity destroyed by ``cut`` over ``n_samples`` sampled networks."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    return summarize(sample_records(model, cut, n_samples, seed))
