"""Synthetic sparse collections for benchmarks and tests.

Two families: unstructured heavy-tailed vectors (uniform coordinates,
Pareto-distributed values), and a planted-cluster model where documents and
queries are noisy copies of shared cluster centers over a Zipf-popular
coordinate vocabulary. The clustered family gives block-skipping something
real to exploit, mirroring how learned sparse embeddings concentrate both
importance and neighborhoods.
"""

from __future__ import annotations

import numpy as np

from .core import COORD_DTYPE, VALUE_DTYPE, Collection


def _assemble(rows: list[tuple[np.ndarray, np.ndarray]], dim: int) -> Collection:
    offsets = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum([len(c) for c, _ in rows], out=offsets[1:])
    coords = np.concatenate([c for c, _ in rows]) if rows else np.empty(0, dtype=COORD_DTYPE)
    values = np.concatenate([v for _, v in rows]) if rows else np.empty(0, dtype=VALUE_DTYPE)
    return Collection(dim, offsets, coords.astype(COORD_DTYPE), values.astype(VALUE_DTYPE))


def _pareto_values(rng: np.random.Generator, n: int, shape: float = 1.3,
                   scale: float = 1.0) -> np.ndarray:
    v = scale * (1.0 + rng.pareto(shape, size=n))
    return np.clip(v, 1e-3, 1e4).astype(VALUE_DTYPE)


def zipf_collection(n_docs: int, dim: int, avg_nnz: int, seed: int,
                    value_shape: float = 1.3) -> Collection:
    """Unstructured positive sparse vectors with heavy-tailed values."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_docs):
        nnz = max(1, min(dim, int(rng.poisson(avg_nnz))))
        coords = np.sort(rng.choice(dim, size=nnz, replace=False)).astype(COORD_DTYPE)
        rows.append((coords, _pareto_values(rng, nnz, value_shape)))
    return _assemble(rows, dim)


def _zipf_coordinate_probs(dim: int, skew: float = 1.0, offset: float = 10.0) -> np.ndarray:
    p = 1.0 / np.power(np.arange(dim, dtype=np.float64) + offset, skew)
    return p / p.sum()


class ClusterModel:
    """Shared cluster centers from which documents and queries are drawn.

    Each cluster carries a two-level pattern: a center shared by all its
    members plus ``n_sub`` sub-topic coordinate sets; a member mixes its
    cluster center with one sub-topic. ``value_dist`` selects the weight
    distribution: "lognormal" mimics the compressed, log-saturated weights of
    learned sparse encoders (mild norm spread, so inner-product clustering
    stays healthy), "pareto" gives genuinely heavy tails for
    mass-concentration experiments.
    """

    def __init__(self, dim: int, n_clusters: int, seed: int, *,
                 center_nnz: int = 24, sub_nnz: int = 12, n_sub: int = 8,
                 coord_skew: float = 1.0, center_value_scale: float = 2.0,
                 value_dist: str = "lognormal", value_sigma: float = 0.5):
        self.dim = dim
        self.n_clusters = n_clusters
        self.n_sub = n_sub
        rng = np.random.default_rng([seed, 0xC1])
        probs = _zipf_coordinate_probs(dim, coord_skew)

        def values_for(n: int) -> np.ndarray:
            if value_dist == "lognormal":
                v = center_value_scale * np.exp(rng.normal(0.0, value_sigma, size=n))
                return np.clip(v, 1e-3, 1e4).astype(VALUE_DTYPE)
            return _pareto_values(rng, n, shape=1.1, scale=center_value_scale)

        self.center_coords: list[np.ndarray] = []
        self.center_values: list[np.ndarray] = []
        self.sub_coords: list[list[np.ndarray]] = []
        self.sub_values: list[list[np.ndarray]] = []
        for _ in range(n_clusters):
            coords = np.sort(rng.choice(dim, size=center_nnz, replace=False, p=probs))
            self.center_coords.append(coords.astype(COORD_DTYPE))
            self.center_values.append(values_for(center_nnz))
            subs_c, subs_v = [], []
            for _ in range(n_sub):
                sc = np.sort(rng.choice(dim, size=sub_nnz, replace=False, p=probs))
                subs_c.append(sc.astype(COORD_DTYPE))
                subs_v.append(values_for(sub_nnz))
            self.sub_coords.append(subs_c)
            self.sub_values.append(subs_v)

    def draw(self, rng: np.random.Generator, cluster: int, sub: int, *,
             keep_prob: float, jitter_sigma: float, noise_nnz: int,
             noise_scale: float = 0.25,
             fresh_values: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """One noisy member: center plus sub-topic coords, dropped and
        jittered, plus a few uniform noise entries.

        With ``fresh_values`` the drawn vector keeps the pattern but re-draws
        its weights from scratch; queries use this, mirroring how query-side
        term importance is largely decoupled from document-side weights.
        """
        coords = np.concatenate([self.center_coords[cluster], self.sub_coords[cluster][sub]])
        values = np.concatenate([self.center_values[cluster], self.sub_values[cluster][sub]])
        keep = rng.random(coords.size) < keep_prob
        if not keep.any():
            keep[rng.integers(coords.size)] = True
        kept_coords = coords[keep]
        if fresh_values:
            kept_values = 2.0 * np.exp(rng.normal(0.0, 0.6, size=int(keep.sum())))
        else:
            kept_values = values[keep] * np.exp(rng.normal(0.0, jitter_sigma, size=int(keep.sum())))
        n_noise = int(rng.poisson(noise_nnz))
        if n_noise:
            noise_coords = rng.integers(0, self.dim, size=n_noise).astype(COORD_DTYPE)
            noise_values = rng.uniform(0.05, noise_scale, size=n_noise)
            kept_coords = np.concatenate([kept_coords, noise_coords])
            kept_values = np.concatenate([kept_values, noise_values])
        order = np.argsort(kept_coords, kind="stable")  # pattern entries win collisions
        uniq, first = np.unique(kept_coords[order], return_index=True)
        vals = np.clip(kept_values[order][first], 1e-3, 1e4).astype(VALUE_DTYPE)
        return uniq.astype(COORD_DTYPE), vals


def clustered_dataset(n_docs: int, n_queries: int, dim: int, n_clusters: int,
                      seed: int, *, center_nnz: int = 24, sub_nnz: int = 12,
                      n_sub: int = 8, doc_keep: float = 0.8,
                      doc_jitter: float = 0.25, doc_noise: int = 6,
                      query_keep: float = 0.85, query_jitter: float = 0.25,
                      query_noise: int = 4, query_fresh: bool = True,
                      value_dist: str = "lognormal",
                      value_sigma: float = 0.5) -> tuple[Collection, Collection]:
    """A planted-cluster corpus plus queries drawn from the same model.

    Document ids are shuffled so cluster membership does not correlate with
    id order; query i is drawn from cluster i mod n_clusters with a random
    sub-topic. Within-cluster value jitter interleaves clusters in impact
    order, so impact-sorted chunking does not get geometric cohesion for
    free; the sub-topic level keeps single clusters from collapsing into one
    block under inner-product assignment. ``query_fresh`` decouples query
    weights from document weights (the default); with it off, queries weight
    coordinates the way documents do, concentrating query-document products
    on the same entries that carry the L1 mass.
    """
    model = ClusterModel(dim, n_clusters, seed, center_nnz=center_nnz,
                         sub_nnz=sub_nnz, n_sub=n_sub, value_dist=value_dist,
                         value_sigma=value_sigma)
    rng = np.random.default_rng([seed, 0xD0C5])
    clusters = np.repeat(np.arange(n_clusters), -(-n_docs // n_clusters))[:n_docs]
    rng.shuffle(clusters)
    rows = [
        model.draw(rng, int(c), int(rng.integers(n_sub)), keep_prob=doc_keep,
                   jitter_sigma=doc_jitter, noise_nnz=doc_noise)
        for c in clusters
    ]
    docs = _assemble(rows, dim)
    qrng = np.random.default_rng([seed, 0x9E])
    qrows = [
        model.draw(qrng, i % n_clusters, int(qrng.integers(n_sub)),
                   keep_prob=query_keep, jitter_sigma=query_jitter,
                   noise_nnz=query_noise, fresh_values=query_fresh)
        for i in range(n_queries)
    ]
    return docs, _assemble(qrows, dim)
