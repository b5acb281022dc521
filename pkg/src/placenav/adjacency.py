"""Heading-gated directed adjacency between place cells.

For every basis heading k the tensor holds directed weights W[k][i][j]
(pre j -> post i). An update is driven by the head-direction trace of k
times the antisymmetric pairing of current rates with activity traces:

    dW[k][i][j] ~ hd_trace[k] * (v_i * trace_j - v_j * trace_i)

so the weight grows when the agent moves from j's field into i's field
while heading along k, and shrinks by exactly the same amount in the
reverse direction. The diagonal is structurally zero and is never read by
preplay.

Storage is a dense array per heading plus a materialization mask: an entry
only comes into existence when a single update exceeds `floor`, which keeps
the tensor effectively sparse (snapshots serialize only materialized
triplets) without paying dict-lookup costs in the inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_FLOOR = 1e-6
# Traces below this are treated as zero in the update inner loop; the
# updates they could produce sit below the materialization floor anyway.
TRACE_SUPPORT_EPS = 1e-4


@dataclass
class AdjacencyTensor:
    """Directed, heading-gated PC -> PC weights."""

    n_hd: int
    n_p: int
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        self.w = np.zeros((self.n_hd, self.n_p, self.n_p))
        self.materialized = np.zeros((self.n_hd, self.n_p, self.n_p), dtype=bool)

    @property
    def nnz(self) -> int:
        return int(self.materialized.sum())

    def slice(self, k: int) -> np.ndarray:
        """The (n_p, n_p) weight matrix for basis heading k (read-only view)."""
        return self.w[k]

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Materialized entries as (k, i, j, value) arrays for serialization."""
        k, i, j = np.nonzero(self.materialized)
        return k, i, j, self.w[k, i, j]

    @classmethod
    def from_triplets(cls, n_hd, n_p, k, i, j, values, floor=DEFAULT_FLOOR):
        tensor = cls(n_hd=n_hd, n_p=n_p, floor=floor)
        tensor.w[k, i, j] = values
        tensor.materialized[k, i, j] = True
        return tensor


def adjacency_update(
    tensor: AdjacencyTensor,
    pc_rates: np.ndarray,
    pc_traces: np.ndarray,
    hd_traces: np.ndarray,
    dt: float,
    tau_w_pp: float,
) -> AdjacencyTensor:
    """Apply one step of the heading-gated antisymmetric update.

    Only the pairs (i, j) where rates or traces are nonzero can change, so
    the work is restricted to the active x traced support. Each pair's
    increment is computed once and applied with opposite signs to (i, j)
    and (j, i), which keeps the tensor exactly antisymmetric. Updates whose
    magnitude stays below `floor` do not create new entries; already
    materialized entries always accumulate.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    active = np.nonzero(pc_rates)[0]
    traced = np.nonzero(pc_traces > TRACE_SUPPORT_EPS)[0]
    if len(active) == 0 and len(traced) == 0:
        return tensor
    support = np.union1d(active, traced)
    v = pc_rates[support]
    tr = pc_traces[support]
    # delta[a, b] = v_a * tr_b - v_b * tr_a on the support set (antisymmetric)
    delta = np.outer(v, tr)
    delta = delta - delta.T

    for k in np.nonzero(hd_traces > TRACE_SUPPORT_EPS)[0]:
        gated = (dt / tau_w_pp) * hd_traces[k] * delta
        block = np.ix_(support, support)
        mat = tensor.materialized[k][block]
        allow = mat | (np.abs(gated) > tensor.floor)
        np.fill_diagonal(allow, False)
        tensor.w[k][block] += np.where(allow, gated, 0.0)
        tensor.materialized[k][block] = allow
    return tensor
