"""Two-level overlapping Schwarz preconditioner applications.

Three matrix-free variants over a Decomposition and a CoarseSpace, all
using exact (sparse direct) local and coarse solves:

* AS2  (additive):        C + sum_i R_i^T (R_i A R_i^T)^{-1} R_i
* SAS2 (scaled additive): C + sum_i R_i^T D_i (R_i A R_i^T)^{-1} R_i
* SHS2 (scaled hybrid):   C + (sum_i R_i^T D_i (R_i A R_i^T)^{-1} R_i)(I - A C)

where C = R_0^T (R_0 A R_0^T)^{-1} R_0 is the coarse correction and the
factor (I - A C) deflates the coarse space out of the residual before the
local solves.  In SHS2 the coarse solve C x is computed once and shared
between the additive term and the deflation factor.

The weights D_i multiply the local solve result before prolongation, as
written above; weights_before_solve=True switches to the variant
R_i^T (R_i A R_i^T)^{-1} D_i R_i for comparison.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .coarse import CoarseSpace, coarse_correct, galerkin
from .decomposition import Decomposition, local_matrix

PRECONDITIONER_KINDS = ("AS2", "SAS2", "SHS2")


class SchwarzPreconditioner:
    """Immutable after construction; apply() is safe for concurrent reads."""

    def __init__(
        self,
        kind: str,
        A,
        decomposition: Decomposition,
        coarse_space: CoarseSpace,
        weights_before_solve: bool = False,
        local_factorizations: list | None = None,
    ):
        if kind not in PRECONDITIONER_KINDS:
            raise ValueError(f"unknown preconditioner {kind!r}, expected one of {PRECONDITIONER_KINDS}")
        if A.shape[0] != decomposition.grid.num_unknowns:
            raise ValueError("matrix size does not match the decomposition's grid")
        self.kind = kind
        self.A = A
        self.decomposition = decomposition
        self.coarse_space = (
            coarse_space if coarse_space.a0_factorization is not None else galerkin(coarse_space, A)
        )
        self.weights_before_solve = weights_before_solve
        # the factorized R_i A R_i^T blocks can be shared across variants
        if local_factorizations is None:
            local_factorizations = [
                linalg.factorize(local_matrix(decomposition, i, A))
                for i in range(decomposition.num_subdomains)
            ]
        elif len(local_factorizations) != decomposition.num_subdomains:
            raise ValueError("one local factorization per subdomain expected")
        self.local_factorizations = local_factorizations

    def _local_sum(self, x: np.ndarray, out: np.ndarray, weighted: bool):
        """Accumulate the one-level term sum_i R_i^T [D_i] A_i^{-1} [D_i] R_i x into out."""
        decomp = self.decomposition
        for idx, w, F in zip(decomp.index_sets, decomp.weights, self.local_factorizations):
            xi = x[idx]
            if weighted and self.weights_before_solve:
                out[idx] += linalg.solve(F, w * xi)
            elif weighted:
                out[idx] += w * linalg.solve(F, xi)
            else:
                out[idx] += linalg.solve(F, xi)

    def apply_as2(self, x: np.ndarray) -> np.ndarray:
        y = coarse_correct(self.coarse_space, x)
        self._local_sum(x, y, weighted=False)
        return y

    def apply_sas2(self, x: np.ndarray) -> np.ndarray:
        y = coarse_correct(self.coarse_space, x)
        self._local_sum(x, y, weighted=True)
        return y

    def apply_shs2(self, x: np.ndarray) -> np.ndarray:
        z = coarse_correct(self.coarse_space, x)
        deflated = x - self.A @ z
        y = z.copy()
        self._local_sum(deflated, y, weighted=True)
        return y

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.result_type(np.asarray(x).dtype, self.A.dtype))
        if x.shape[0] != self.A.shape[0]:
            raise ValueError(f"operator has dimension {self.A.shape[0]}, vector {x.shape[0]}")
        if self.kind == "AS2":
            return self.apply_as2(x)
        if self.kind == "SAS2":
            return self.apply_sas2(x)
        return self.apply_shs2(x)

    __call__ = apply
