"""Dense complex linear algebra and quantum primitives.

States live on labelled tensor-product bases.  A basis is an ordered tuple of
:class:`Factor` objects; the amplitude vector is indexed in row-major order
over the factors, so the last factor varies fastest (``numpy.kron`` order).

Operators are plain 2-d arrays.  ``scipy.sparse`` matrices are accepted
wherever a matrix is, because the eraser's signal-idler space grows as
``4 N**2`` and cannot be held densely for realistic ``N``.

Random sampling goes through a counter-based generator (Philox-4x64 from
numpy): the uniform variate for run ``i`` under seed ``s`` is the first
64-bit output of ``Philox(key=s, counter=i)``.  Each run therefore depends
only on ``(seed, run_index)`` and can be generated in any order or in bulk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateStateError, DistributionError, ShapeError, SizeError

ATOL_INVARIANT = 1e-10
ATOL_IDENTITY = 1e-12

# dense products beyond this many entries are refused (~2 GiB of complex128)
MAX_DENSE_ENTRIES = 2**27
# keeps row/column index arithmetic inside int64
MAX_DIMENSION = 2**62

Matrix = Union[np.ndarray, sp.spmatrix, sp.sparray]


class Factor(NamedTuple):
    """One tensor factor: a name and its ordered basis symbols."""

    name: str
    labels: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.labels)


def basis_labels(factors: Sequence[Factor]) -> list[str]:
    """Joint basis labels in amplitude order, e.g. ``['↑off', '↑on', ...]``."""
    labels = [""]
    for f in factors:
        labels = [a + b for a in labels for b in f.labels]
    return labels


def _dims(factors: Sequence[Factor]) -> tuple[int, ...]:
    return tuple(f.dim for f in factors)


@dataclass(frozen=True)
class QuantumState:
    """Complex amplitude vector over a labelled tensor-product basis.

    ``kind`` is ``"normalized"`` (unit norm enforced) or ``"conditional"``
    (a post-selected, possibly sub-normalized state).  ``weight`` records the
    squared norm that was divided out when a conditional state was
    renormalized; it is 1 for states that were never rescaled.
    """

    factors: tuple[Factor, ...]
    amplitudes: np.ndarray
    kind: str = "normalized"
    weight: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "amplitudes", amps)
        if self.kind not in ("normalized", "conditional"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if amps.size != int(np.prod(self.dims)):
            raise ShapeError(
                f"{amps.size} amplitudes for basis of dimension {int(np.prod(self.dims))}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if self.kind == "normalized" and abs(self.norm_sq - 1.0) > ATOL_INVARIANT:
            raise DegenerateStateError(
                f"state flagged normalized has squared norm {self.norm_sq!r}"
            )

    @classmethod
    def from_terms(
        cls,
        factors: Sequence[Factor],
        terms: Mapping[tuple[str, ...] | str, complex],
        kind: str = "normalized",
    ) -> "QuantumState":
        """Build a state from ``{(label, label, ...): amplitude}`` terms."""
        factors = tuple(factors)
        dims = _dims(factors)
        amps = np.zeros(int(np.prod(dims)), dtype=complex)
        for key, value in terms.items():
            parts = (key,) if isinstance(key, str) else tuple(key)
            if len(parts) != len(factors):
                raise ShapeError(f"term {key!r} does not name one label per factor")
            idx = tuple(f.labels.index(p) for f, p in zip(factors, parts))
            amps[np.ravel_multi_index(idx, dims)] += value
        return cls(factors, amps, kind=kind)

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.factors)

    @property
    def labels(self) -> list[str]:
        return basis_labels(self.factors)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(
            self.factors,
            np.outer(self.amplitudes, self.amplitudes.conj()),
            trace=self.norm_sq,
            weight=self.weight,
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive semidefinite matrix over a labelled basis.

    ``trace`` is the declared trace (1 for states of unit norm, less for
    reductions of conditional states).
    """

    factors: tuple[Factor, ...]
    matrix: np.ndarray
    trace: float = 1.0
    weight: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "matrix", m)
        n = int(np.prod(self.dims))
        if m.shape != (n, n):
            raise ShapeError(f"density matrix of shape {m.shape} for dimension {n}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > ATOL_INVARIANT:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - self.trace) > ATOL_INVARIANT:
            raise ValueError(
                f"trace {np.trace(m).real!r} differs from declared {self.trace!r}"
            )
        if n and np.linalg.eigvalsh(m)[0] < -1e-9:
            raise ValueError("density matrix is not positive semidefinite")

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.factors)

    @property
    def labels(self) -> list[str]:
        return basis_labels(self.factors)

    def normalized(self) -> "DensityMatrix":
        """Rescale to unit trace, recording the removed trace in ``weight``."""
        if self.trace <= 0:
            raise DegenerateStateError("cannot normalize a zero-trace density matrix")
        return DensityMatrix(
            self.factors, self.matrix / self.trace, trace=1.0, weight=self.weight * self.trace
        )


def _shape(m: Matrix) -> tuple[int, int]:
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got an array of shape {m.shape}")
    return m.shape


def tensor_product(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; sparse if either operand is sparse."""
    (ra, ca), (rb, cb) = _shape(a), _shape(b)
    rows, cols = ra * rb, ca * cb
    if rows > MAX_DIMENSION or cols > MAX_DIMENSION:
        raise SizeError(f"tensor product dimension {rows}x{cols} overflows indexing")
    if sp.issparse(a) or sp.issparse(b):
        return sp.kron(a, b, format="csr")
    if rows * cols > MAX_DENSE_ENTRIES:
        raise SizeError(
            f"dense tensor product of {rows}x{cols} entries; pass sparse operands instead"
        )
    return np.kron(a, b)


def kron_all(*ops: Matrix) -> Matrix:
    out = ops[0]
    for op in ops[1:]:
        out = tensor_product(out, op)
    return out


def identity(n: int, sparse: bool = False) -> Matrix:
    if sparse:
        return sp.identity(n, dtype=complex, format="csr")
    return np.eye(n, dtype=complex)


def max_abs(m: Matrix) -> float:
    """Largest entry modulus of a dense or sparse matrix (0 for an empty one)."""
    if sp.issparse(m):
        m = sp.csr_matrix(m)
        return float(np.max(np.abs(m.data), initial=0.0))
    return float(np.max(np.abs(np.asarray(m)), initial=0.0))


def apply(
    op: Matrix,
    state: QuantumState,
    factors: Sequence[Factor] | None = None,
    kind: str | None = None,
) -> QuantumState:
    """Matrix-vector product ``op @ state``.

    ``factors`` declares the output basis and defaults to the input basis
    (valid for square operators only).  The result keeps the input ``kind``
    unless overridden, so a non-isometric map must be given ``kind="conditional"``.
    """
    rows, cols = _shape(op)
    if cols != state.amplitudes.size:
        raise ShapeError(f"operator with {cols} columns applied to dimension {state.amplitudes.size}")
    out_factors = state.factors if factors is None else tuple(factors)
    if int(np.prod(_dims(out_factors))) != rows:
        raise ShapeError(f"operator with {rows} rows does not produce the declared output basis")
    amps = op @ state.amplitudes
    return QuantumState(out_factors, np.asarray(amps).reshape(-1), kind=kind or state.kind, weight=state.weight)


def _gram_residual(m: Matrix) -> float:
    gram = m.conj().T @ m
    if sp.issparse(gram):
        gram = gram.toarray()
    return float(np.max(np.abs(np.asarray(gram) - np.eye(gram.shape[0])), initial=0.0))


def is_unitary(m: Matrix, tol: float = ATOL_IDENTITY) -> bool:
    rows, cols = _shape(m)
    if rows != cols:
        raise ShapeError(f"is_unitary needs a square matrix, got {rows}x{cols}; use is_isometry")
    return _gram_residual(m) <= tol


def is_isometry(m: Matrix, tol: float = ATOL_IDENTITY) -> bool:
    """True iff ``m^H m`` is the identity on the input space."""
    rows, cols = _shape(m)
    if rows < cols:
        return False
    return _gram_residual(m) <= tol


def _factor_position(factors: Sequence[Factor], which: int | str) -> int:
    if isinstance(which, str):
        names = [f.name for f in factors]
        if which not in names:
            raise IndexError(f"no factor named {which!r} in {names}")
        return names.index(which)
    if not 0 <= which < len(factors):
        raise IndexError(f"factor index {which} out of range for {len(factors)} factors")
    return which


def partial_trace(rho: DensityMatrix, factor: int | str) -> DensityMatrix:
    """Trace out one factor (by position or name)."""
    pos = _factor_position(rho.factors, factor)
    dims = rho.dims
    k = len(dims)
    t = rho.matrix.reshape(dims + dims)
    reduced = np.trace(t, axis1=pos, axis2=pos + k)
    kept = rho.factors[:pos] + rho.factors[pos + 1 :]
    n = int(np.prod(_dims(kept)))
    return DensityMatrix(kept, reduced.reshape(n, n), trace=rho.trace, weight=rho.weight)


def renormalize(state: QuantumState) -> QuantumState:
    """Unit-norm copy of ``state``; the removed squared norm goes to ``weight``."""
    nsq = state.norm_sq
    if nsq <= 0.0:
        raise DegenerateStateError("cannot renormalize a zero-norm state")
    return QuantumState(
        state.factors,
        state.amplitudes / np.sqrt(nsq),
        kind="normalized",
        weight=state.weight * nsq,
    )


def born_distribution(state: QuantumState) -> dict[str, float]:
    """Born-rule probabilities keyed by joint basis label, in basis order.

    Conditional states are renormalized first; use :func:`renormalize`
    directly when the normalization constant is needed.
    """
    if state.norm_sq <= 0.0:
        raise DegenerateStateError("zero-norm state has no Born distribution")
    if state.kind == "conditional":
        state = renormalize(state)
    probs = np.abs(state.amplitudes) ** 2
    return dict(zip(state.labels, probs.tolist()))


# -- seeded sampling --------------------------------------------------------

_INV_2_53 = 1.0 / 9007199254740992.0


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return seed


def run_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniform variates in [0, 1) for runs ``start .. stop-1``.

    Entry ``i - start`` depends only on ``(seed, i)``; calling this over any
    partition of a run range yields the same concatenated values.
    """
    n = stop - start
    if n < 0:
        raise ValueError("stop must not precede start")
    if n == 0:
        return np.empty(0)
    bg = np.random.Philox(key=_check_seed(seed), counter=start)
    raw = bg.random_raw(4 * n).reshape(n, 4)[:, 0]
    return (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53


def run_uniform(seed: int, run_index: int) -> float:
    return float(run_uniforms(seed, run_index, run_index + 1)[0])


def check_distribution(probs: Sequence[float], atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.size == 0:
        raise DistributionError("empty distribution")
    if np.any(p < -1e-12):
        raise DistributionError(f"negative probability {p.min()!r}")
    if not np.all(np.isfinite(p)):
        raise DistributionError("non-finite probability")
    if abs(p.sum() - 1.0) > atol:
        raise DistributionError(f"probabilities sum to {p.sum()!r}")
    return np.clip(p, 0.0, None)


def inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Indices drawn by inverse-CDF lookup of ``u`` over ``probs`` in order."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    # u can reach above cdf[-1] only through rounding; pick the last live label
    last = int(np.flatnonzero(probs > 0)[-1])
    return np.minimum(idx, last)


def sample_outcome(dist: Mapping, seed: int, run_index: int):
    """Draw one label of ``dist`` for run ``run_index`` under ``seed``."""
    labels = list(dist)
    p = check_distribution(list(dist.values()))
    u = np.array([run_uniform(seed, run_index)])
    return labels[int(inverse_cdf(p, u)[0])]
