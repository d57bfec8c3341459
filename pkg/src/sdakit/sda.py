"""Semi-supervised discriminant analysis solvers on implicit operators.

All four algorithms score samples by solving against the spectral pencil

    (W + 0) z = lambda [ (1 - alpha) (I_l + 0) + alpha L ] z

where W + 0 broadcasts class means over labeled rows and the denominator
blends supervision with a graph Laplacian smoother. None of them assemble
a matrix: every product is composed from sparse matvecs, the class-mean
broadcast, and the rank-one labeled-mean centering that removes the
non-discriminative all-ones direction from the Krylov space.

  * fsda_solve:   one shifted solve in feature space (D dimensions); the
                  smoother is folded into the operator.
  * csr_sda_solve: CG on the centered spectral system (N dimensions), then
                  a shifted regression of the resulting rating onto features.
  * sa_sda_solve: shifted CG directly on the centered spectral system plus
                  beta I_N; rates samples without touching feature space.
  * sr_sda_solve: block solve + 2x2 Rayleigh-Ritz for the top two pencil
                  eigenvectors, then shifted regressions (the second,
                  discriminative eigenvector provides the rating).

Each solver runs a single power sweep: with two classes the discriminative
part of the pencil has rank one, so one sweep already aligns with the
dominant eigenvector and no outer loop is needed.

Solvers require labeled samples to occupy the first l rows (arrange with
arrange_labeled_first, which also returns the permutation used).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .graph import Laplacian
from .krylov import (
    LinearOperator,
    ShiftGrid,
    as_shift_grid,
    block_cg,
    cg,
    rayleigh_ritz_2x2,
    shifted_cg,
    subspace_iteration,
)
from .sparse import (
    CenteringVector,
    LabelVector,
    SparseMatrix,
    centered_matvec_transpose,
    labeled_first_permutation,
    labeled_mean,
    permute_rows,
    permute_symmetric,
)

ALGORITHMS = ("fsda", "csr-sda", "sa-sda", "sr-sda", "lda")


@dataclass
class SdaProblem:
    """One rating problem: data, labels, graph Laplacian, and solve knobs.

    tol / max_iter_d govern D-dimensional solves (budget k2); tol_spectral /
    max_iter_n govern N-dimensional solves (budget k1). tol_spectral
    defaults to tol.
    """

    x: SparseMatrix
    labels: LabelVector
    lap: Laplacian
    alpha: float
    betas: Union[ShiftGrid, np.ndarray, list, tuple]
    tol: float = 1e-8
    tol_spectral: Optional[float] = None
    max_iter_n: int = 1000
    max_iter_d: int = 1000
    seed: int = 0

    def __post_init__(self):
        self.betas = as_shift_grid(self.betas)
        if self.labels.n != self.x.n_rows:
            raise ValueError(
                f"labels cover {self.labels.n} samples but x has {self.x.n_rows} rows"
            )
        lm = self.lap.matrix
        if lm.n_rows != lm.n_cols or lm.n_rows != self.x.n_rows:
            raise ValueError("laplacian must be square with one row per sample")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.labels.n_class1 == 0 or self.labels.n_class2 == 0:
            raise ValueError("both classes need at least one labeled sample")
        if not self.labels.is_labeled_first:
            raise ValueError(
                "labeled samples must occupy the first rows; "
                "use arrange_labeled_first to permute the problem"
            )
        if self.tol <= 0 or (self.tol_spectral is not None and self.tol_spectral <= 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter_n < 1 or self.max_iter_d < 1:
            raise ValueError("iteration budgets must be at least 1")

    @property
    def n(self) -> int:
        return self.x.n_rows

    @property
    def d(self) -> int:
        return self.x.n_cols

    @property
    def tol_n(self) -> float:
        return self.tol if self.tol_spectral is None else self.tol_spectral


def apply_w(labels: LabelVector, z: np.ndarray) -> np.ndarray:
    """(W + 0) z: broadcast each class mean of z over that class's labeled
    rows; unlabeled rows get 0."""
    z = np.asarray(z, dtype=np.float64)
    out = np.zeros_like(z)
    m1, m2 = labels.mask_class1, labels.mask_class2
    out[m1] = z[m1].sum() / labels.n_class1
    out[m2] = z[m2].sum() / labels.n_class2
    return out


def apply_smoother(labels: LabelVector, lap: Laplacian, alpha: float, z: np.ndarray) -> np.ndarray:
    """[(1 - alpha)(I_l + 0) + alpha L] z."""
    z = np.asarray(z, dtype=np.float64)
    masked = np.where(labels.mask_labeled, z, 0.0)
    if alpha == 0.0:
        return masked
    smoothed = alpha * lap.matrix.matvec(z)
    if alpha == 1.0:
        return smoothed
    return (1.0 - alpha) * masked + smoothed


def spectral_operator(p: SdaProblem) -> LinearOperator:
    """The smoother as an N-dimensional operator (used uncentered by SR)."""
    return LinearOperator(p.n, lambda z: apply_smoother(p.labels, p.lap, p.alpha, z))


def centered_spectral_operator(p: SdaProblem) -> LinearOperator:
    """Smoother composed with the transposed centering of the identity
    data matrix: z -> M z - 1_l sum(M z) / l. Annihilates the all-ones
    direction, so Krylov iterates never pick it up."""
    ind = p.labels.mask_labeled.astype(np.float64)
    ell = float(p.labels.n_labeled)

    def apply(z):
        mz = apply_smoother(p.labels, p.lap, p.alpha, z)
        return mz - ind * (mz.sum() / ell)

    return LinearOperator(p.n, apply)


def fsda_operator(p: SdaProblem, c: CenteringVector) -> LinearOperator:
    """w -> (X - 1 mu^T)^T M X w, the D-dimensional rating operator.

    One-sided centering equals two-sided here: (X - 1 mu^T)^T M 1_l = 0
    because the centered transpose kills the labeled indicator.
    """

    def apply(w):
        xw = p.x.matvec(w)
        mz = apply_smoother(p.labels, p.lap, p.alpha, xw)
        return centered_matvec_transpose(p.x, c, mz)

    return LinearOperator(p.d, apply)


def regression_operator(p: SdaProblem) -> LinearOperator:
    """w -> X^T X w for the least-squares rating regression."""
    return LinearOperator(p.d, lambda w: p.x.matvec_transpose(p.x.matvec(w)))


@dataclass(frozen=True)
class RatingVector:
    """Scores for all N samples; source records whether they came from a
    feature-space projection (s = X w) or directly from the spectral
    solution (s = z)."""

    scores: np.ndarray
    source: str  # "projection" | "spectral"


@dataclass
class PhaseStats:
    """Instrumentation for one solve phase."""

    dimension: int
    iterations: np.ndarray | int
    operator_applications: int
    residuals: np.ndarray | float
    converged: np.ndarray | bool

    @property
    def ok(self) -> bool:
        return bool(np.all(self.converged))

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "iterations": np.asarray(self.iterations).tolist(),
            "operator_applications": self.operator_applications,
            "residuals": np.asarray(self.residuals).tolist(),
            "converged": np.asarray(self.converged).tolist(),
        }


@dataclass
class SolveReport:
    """Structured outcome of one solver run.

    ratings maps each beta to a RatingVector. FSDA's single D-dimensional
    solve is reported under regression; SA-SDA rates straight from its
    N-dimensional solve and has no regression phase.
    """

    algorithm: str
    alpha: float
    betas: np.ndarray
    ratings: dict[float, RatingVector]
    spectral: Optional[PhaseStats]
    regression: Optional[PhaseStats]
    wall_time_s: float
    spectral_eigenvalues: Optional[np.ndarray] = None
    spectral_vectors: Optional[np.ndarray] = None  # N x k, when a z was computed
    directions: Optional[dict[float, np.ndarray]] = None  # beta -> D vector w

    @property
    def converged(self) -> bool:
        phases = [s for s in (self.spectral, self.regression) if s is not None]
        return all(s.ok for s in phases)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "alpha": self.alpha,
            "betas": np.asarray(self.betas).tolist(),
            "converged": self.converged,
            "wall_time_s": self.wall_time_s,
            "spectral": None if self.spectral is None else self.spectral.to_dict(),
            "regression": None if self.regression is None else self.regression.to_dict(),
            "spectral_eigenvalues": None
            if self.spectral_eigenvalues is None
            else np.asarray(self.spectral_eigenvalues).tolist(),
        }


def _oriented(p: SdaProblem, scores: np.ndarray) -> np.ndarray:
    """Ratings come from eigenvector-like directions whose sign is
    arbitrary; orient each so the labeled scores correlate non-negatively
    with the class labels."""
    if float(p.labels.labels @ scores) < 0.0:
        return -scores
    return scores


def _ratings_from_projection(
    p: SdaProblem, solutions: np.ndarray
) -> tuple[dict[float, RatingVector], dict[float, np.ndarray]]:
    """Project each per-shift direction to sample scores.

    Returns (ratings, directions) with a consistent sign per shift: flipping
    a score vector to correlate non-negatively with the labels flips its
    feature-space direction too, so scores == X @ direction always holds.
    """
    y = p.labels.labels.astype(np.float64)
    ratings: dict[float, RatingVector] = {}
    directions: dict[float, np.ndarray] = {}
    for s, beta in enumerate(p.betas.betas):
        w = solutions[:, s]
        scores = p.x.matvec(w)
        if float(y @ scores) < 0.0:
            scores, w = -scores, -w
        ratings[float(beta)] = RatingVector(scores=scores, source="projection")
        directions[float(beta)] = w
    return ratings, directions


def _orthogonalized_probe(p: SdaProblem, rng: np.random.Generator) -> np.ndarray:
    """Random probe with its labeled mean removed: r - 1 <1_l, r> / l."""
    r = rng.uniform(-1.0, 1.0, size=p.n)
    return r - r[p.labels.mask_labeled].sum() / p.labels.n_labeled


def fsda_solve(p: SdaProblem) -> SolveReport:
    """One shifted Krylov solve of the centered rating operator in feature
    space; rating s = X w per shift."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(p.seed)
    c = labeled_mean(p.x, p.labels)
    op = fsda_operator(p, c)
    r = rng.uniform(-1.0, 1.0, size=p.d)
    rhs = centered_matvec_transpose(p.x, c, apply_w(p.labels, p.x.matvec(r)))
    res = shifted_cg(op, rhs, p.betas, p.tol, p.max_iter_d)
    ratings, directions = _ratings_from_projection(p, res.solutions)
    report = SolveReport(
        algorithm="fsda",
        alpha=p.alpha,
        betas=p.betas.betas,
        ratings=ratings,
        directions=directions,
        spectral=None,
        regression=PhaseStats(
            dimension=p.d,
            iterations=res.iterations,
            operator_applications=op.n_applies,
            residuals=res.residual_norms,
            converged=res.converged,
        ),
        wall_time_s=time.perf_counter() - t0,
    )
    return report


def csr_sda_solve(p: SdaProblem) -> SolveReport:
    """Centered spectral solve for the rating z, then shifted regression of
    z onto features; rating s = X w per shift."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(p.seed)
    sop = centered_spectral_operator(p)
    rhs = apply_w(p.labels, _orthogonalized_probe(p, rng))
    z, hist = cg(sop, rhs, p.tol_n, p.max_iter_n)
    spectral = PhaseStats(
        dimension=p.n,
        iterations=len(hist) - 1,
        operator_applications=sop.n_applies,
        residuals=float(hist[-1]),
        converged=bool(hist[-1] < p.tol_n * hist[0]) if hist[0] > 0 else True,
    )
    rop = regression_operator(p)
    res = shifted_cg(rop, p.x.matvec_transpose(z), p.betas, p.tol, p.max_iter_d)
    ratings, directions = _ratings_from_projection(p, res.solutions)
    return SolveReport(
        algorithm="csr-sda",
        alpha=p.alpha,
        betas=p.betas.betas,
        ratings=ratings,
        directions=directions,
        spectral=spectral,
        regression=PhaseStats(
            dimension=p.d,
            iterations=res.iterations,
            operator_applications=rop.n_applies,
            residuals=res.residual_norms,
            converged=res.converged,
        ),
        wall_time_s=time.perf_counter() - t0,
        spectral_vectors=z[:, None],
    )


def sa_sda_solve(p: SdaProblem) -> SolveReport:
    """Shifted solve of the centered spectral system plus beta I_N; the
    solution itself is the rating (no feature-space pass). Requires
    alpha != 0: at alpha = 0 the system leaves every unlabeled sample
    unrated, so the restriction is part of the contract."""
    if p.alpha == 0.0:
        raise ValueError(
            "sa-sda requires alpha != 0: without the Laplacian term the "
            "spectral system never propagates ratings to unlabeled samples"
        )
    t0 = time.perf_counter()
    rng = np.random.default_rng(p.seed)
    sop = centered_spectral_operator(p)
    rhs = apply_w(p.labels, _orthogonalized_probe(p, rng))
    res = shifted_cg(sop, rhs, p.betas, p.tol_n, p.max_iter_n)
    ratings = {
        float(beta): RatingVector(
            scores=_oriented(p, res.solutions[:, s].copy()), source="spectral"
        )
        for s, beta in enumerate(p.betas.betas)
    }
    return SolveReport(
        algorithm="sa-sda",
        alpha=p.alpha,
        betas=p.betas.betas,
        ratings=ratings,
        spectral=PhaseStats(
            dimension=p.n,
            iterations=res.iterations,
            operator_applications=sop.n_applies,
            residuals=res.residual_norms,
            converged=res.converged,
        ),
        regression=None,
        wall_time_s=time.perf_counter() - t0,
        spectral_vectors=res.solutions,
    )


def sr_sda_solve(p: SdaProblem) -> SolveReport:
    """Block solve of the uncentered spectral pencil for a 2-dimensional
    basis, 2x2 Rayleigh-Ritz extraction, then shifted regressions for both
    Ritz vectors; the second (discriminative) one provides the rating."""
    t0 = time.perf_counter()
    sop = spectral_operator(p)
    a_op = LinearOperator(p.n, lambda z: apply_w(p.labels, z))

    block_trace: list[tuple[int, np.ndarray]] = []
    rhs_norms = np.zeros(2)

    def b_solve(rhs):
        rhs_norms[:] = np.linalg.norm(rhs, axis=0)
        return block_cg(
            sop, rhs, p.tol_n, p.max_iter_n,
            callback=lambda i, res: block_trace.append((i, res.copy())),
        )

    z = subspace_iteration(a_op, b_solve, 2, p.seed)
    spectral_iters = block_trace[-1][0] if block_trace else 0
    spectral_res = block_trace[-1][1] if block_trace else np.zeros(2)
    spectral_ops = sop.n_applies
    spectral = PhaseStats(
        dimension=p.n,
        iterations=spectral_iters,
        operator_applications=spectral_ops,
        residuals=spectral_res,
        converged=np.all(spectral_res <= p.tol_n * np.maximum(rhs_norms, 1e-300)),
    )

    lam, q = rayleigh_ritz_2x2(z, a_op, sop)
    ritz = z @ q  # columns: dominant (non-discriminative), second (discriminative)
    # Eigenvector sign is arbitrary; orient each Ritz vector so its labeled
    # entries correlate non-negatively with the class labels.
    y = p.labels.labels.astype(np.float64)
    for j in range(ritz.shape[1]):
        if float(y @ ritz[:, j]) < 0.0:
            ritz[:, j] = -ritz[:, j]

    rop = regression_operator(p)
    solves = [
        shifted_cg(rop, p.x.matvec_transpose(ritz[:, j]), p.betas, p.tol, p.max_iter_d)
        for j in (0, 1)
    ]
    discriminative = solves[1]
    ratings, directions = _ratings_from_projection(p, discriminative.solutions)
    return SolveReport(
        algorithm="sr-sda",
        alpha=p.alpha,
        betas=p.betas.betas,
        ratings=ratings,
        directions=directions,
        spectral=spectral,
        regression=PhaseStats(
            dimension=p.d,
            iterations=discriminative.iterations,
            operator_applications=rop.n_applies,
            residuals=discriminative.residual_norms,
            converged=np.concatenate([solves[0].converged, solves[1].converged]),
        ),
        wall_time_s=time.perf_counter() - t0,
        spectral_eigenvalues=lam,
        spectral_vectors=ritz,
    )


_SOLVERS = {
    "fsda": fsda_solve,
    "csr-sda": csr_sda_solve,
    "sa-sda": sa_sda_solve,
    "sr-sda": sr_sda_solve,
}


def solve(p: SdaProblem, algorithm: str) -> SolveReport:
    """Dispatch by algorithm name; 'lda' is fsda constrained to alpha = 0."""
    if algorithm == "lda":
        if p.alpha != 0.0:
            raise ValueError(
                f"algorithm 'lda' is fsda at alpha = 0, but alpha = {p.alpha}; "
                "drop the alpha setting or use fsda"
            )
        report = fsda_solve(p)
        report.algorithm = "lda"
        return report
    if algorithm not in _SOLVERS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    return _SOLVERS[algorithm](p)


def invert_permutation(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def arrange_labeled_first(
    x: SparseMatrix, lap: Laplacian, labels: LabelVector
) -> tuple[SparseMatrix, Laplacian, LabelVector, np.ndarray]:
    """Permute a problem so labeled samples occupy the first rows.

    Returns (x, laplacian, labels, perm) with new[i] = old[perm[i]]. Undo
    on a rating vector with scores_original = scores[invert_permutation(perm)].
    """
    perm = labeled_first_permutation(labels)
    if np.array_equal(perm, np.arange(labels.n)):
        return x, lap, labels, perm
    x2 = permute_rows(x, perm)
    lap2 = Laplacian(
        matrix=permute_symmetric(lap.matrix, perm),
        degrees=np.asarray(lap.degrees)[perm],
    )
    return x2, lap2, LabelVector(labels.labels[perm]), perm
