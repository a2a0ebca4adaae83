"""Sentence selection under a size budget and a redundancy cap.

The program maximizes sum(L_i * X_i * S_i) over 0/1 indicators X subject to

* sum(L_i * X_i) <= Size, and
* mean pairwise similarity of the chosen sentences <= theta whenever two or
  more are chosen.

The redundancy ratio is linearized exactly as
sum over unordered chosen pairs of (sims_ij - theta) <= 0, which makes
feasibility checks cheap.  ``select_exact`` is a depth-first branch and
bound whose upper bound is the fractional-knapsack relaxation of the
objective (the similarity constraint is ignored in the bound, which keeps
it admissible).  ``select_heuristic`` is greedy insertion plus
first-improvement local search for instances above the exact-size cap.

Floating-point contract: objective and pair-slack values are accumulated
in ascending index order (outer index ascending, inner pairs ascending),
so results are bit-comparable with a brute-force enumeration that sums the
same way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .document import Paper, sentence_stream
from .errors import TooFewPairs, TooLarge

FEASIBILITY_TOL = 1e-9
# Pruning safety margin: float accumulation noise is ~1e-11 at these scales,
# so a subtree is discarded only when its bound trails the incumbent by more.
_BOUND_MARGIN = 1e-7

EXACT_CAP_DEFAULT = 25

SIZE_FEATURE_NAMES = (
    "char_count",
    "sentence_count",
    "section_count",
    "graphic_count",
    "ref_count",
    "mean_sentence_tokens",
    "mean_sentence_chars",
)

SIZE_MODEL_FORMAT_VERSION = 1
SIZE_FLOOR = 200


@dataclass
class SelectionProblem:
    lengths: np.ndarray  # characters per sentence, positive
    scores: np.ndarray  # predicted salience
    sims: np.ndarray  # symmetric, unit diagonal
    size: int  # character budget
    theta: float

    def __post_init__(self):
        self.lengths = np.asarray(self.lengths, dtype=np.int64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.sims = np.asarray(self.sims, dtype=np.float64)
        n = len(self.lengths)
        if len(self.scores) != n or self.sims.shape != (n, n):
            raise ValueError("lengths, scores, sims sizes disagree")
        if n and self.lengths.min() <= 0:
            raise ValueError("sentence lengths must be positive")
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if n:
            if np.abs(self.sims - self.sims.T).max() > 1e-9:
                raise ValueError("sims must be symmetric within 1e-9")
            if np.abs(np.diag(self.sims) - 1.0).max() > 1e-9:
                raise ValueError("sims diagonal must be 1 within 1e-9")

    @property
    def n(self) -> int:
        return len(self.lengths)


@dataclass(frozen=True)
class Selection:
    chosen: tuple[int, ...]
    objective: float
    avg_similarity: float
    total_length: int


def pair_slack(indices, sims, theta) -> float:
    """sum over pairs i<j of (sims[i,j] - theta), outer index ascending."""
    indices = sorted(indices)
    slack = 0.0
    for pos, j in enumerate(indices):
        for i in indices[:pos]:
            slack += sims[i, j] - theta
    return slack


def is_sim_feasible(indices, sims, theta) -> bool:
    if len(indices) < 2:
        return True
    return pair_slack(indices, sims, theta) <= FEASIBILITY_TOL


def selection_from_indices(problem: SelectionProblem, indices) -> Selection:
    indices = tuple(sorted(indices))
    objective = 0.0
    total = 0
    for i in indices:
        objective += problem.lengths[i] * problem.scores[i]
        total += int(problem.lengths[i])
    k = len(indices)
    if k >= 2:
        sim_sum = 0.0
        for pos, j in enumerate(indices):
            for i in indices[:pos]:
                sim_sum += problem.sims[i, j]
        avg = sim_sum / (k * (k - 1) / 2)
    else:
        avg = 0.0
    return Selection(
        chosen=indices,
        objective=float(objective),
        avg_similarity=float(avg),
        total_length=total,
    )


def select_exact(problem: SelectionProblem, cap: int = EXACT_CAP_DEFAULT) -> Selection:
    """Globally optimal selection via depth-first branch and bound.

    Ties between equal-objective optima break toward the lexicographically
    smallest index set; the empty set is always feasible, so the solver
    never fails on a tight budget.  Raises TooLarge above ``cap``.
    """
    n = problem.n
    if n > cap:
        raise TooLarge(f"{n} sentences exceeds the exact-solver cap {cap}")
    L = problem.lengths
    S = problem.scores
    sims = problem.sims
    size = problem.size
    theta = problem.theta

    by_score = sorted(range(n), key=lambda i: (-S[i], i))

    def upper_bound(idx: int, cap_left: int) -> float:
        # fractional knapsack over undecided items (indices >= idx); the
        # similarity constraint is ignored, keeping the bound admissible
        bound = 0.0
        for i in by_score:
            if i < idx:
                continue
            if S[i] <= 0.0:
                break
            li = int(L[i])
            if li <= cap_left:
                cap_left -= li
                bound += li * S[i]
            else:
                bound += cap_left * S[i]
                break
        return bound

    best_obj = 0.0
    best_set: tuple[int, ...] = ()
    chosen: list[int] = []

    def dfs(idx: int, len_acc: int, obj_acc: float, slack_acc: float) -> None:
        nonlocal best_obj, best_set
        if idx == n:
            return
        if obj_acc + upper_bound(idx, size - len_acc) <= best_obj - _BOUND_MARGIN:
            return  # nothing in this subtree can improve the incumbent
        li = int(L[idx])
        if len_acc + li <= size:
            new_slack = slack_acc
            for c in chosen:
                new_slack += sims[c, idx] - theta
            new_obj = obj_acc + li * S[idx]
            chosen.append(idx)
            # include-first DFS in ascending index order reaches candidate
            # sets in lexicographic order, so strict improvement alone
            # realizes the smallest-index-set tie break
            if (len(chosen) < 2 or new_slack <= FEASIBILITY_TOL) and new_obj > best_obj:
                best_obj = float(new_obj)
                best_set = tuple(chosen)
            dfs(idx + 1, len_acc + li, new_obj, new_slack)
            chosen.pop()
        dfs(idx + 1, len_acc, obj_acc, slack_acc)

    dfs(0, 0, 0.0, 0.0)
    return selection_from_indices(problem, best_set)


def _objective(indices, L, S) -> float:
    obj = 0.0
    for i in sorted(indices):
        obj += L[i] * S[i]
    return obj


def select_heuristic(problem: SelectionProblem) -> Selection:
    """Greedy insertion by score density plus first-improvement local search.

    Any instance size is accepted; the result always satisfies both
    constraints.  Moves are scanned in a fixed order (adds, drops, swaps,
    each in ascending index order), so the result is deterministic.
    """
    n = problem.n
    L = problem.lengths
    S = problem.scores
    sims = problem.sims
    size = problem.size
    theta = problem.theta

    def fits(indices) -> bool:
        return sum(int(L[i]) for i in indices) <= size

    def feasible(indices) -> bool:
        return fits(indices) and is_sim_feasible(indices, sims, theta)

    # greedy by S_i / L_i density; non-positive scores never help the
    # objective, so insertion stops once densities go non-positive
    density_order = sorted(range(n), key=lambda i: (-(S[i] / L[i]), i))
    chosen: list[int] = []
    len_acc = 0
    for i in density_order:
        if S[i] <= 0.0:
            break
        if len_acc + int(L[i]) > size:
            continue
        trial = sorted(chosen + [i])
        if is_sim_feasible(trial, sims, theta):
            chosen = trial
            len_acc += int(L[i])

    current_obj = _objective(chosen, L, S)
    improved = True
    while improved:
        improved = False
        chosen_set = set(chosen)
        # add moves
        for i in range(n):
            if i in chosen_set:
                continue
            trial = sorted(chosen + [i])
            trial_obj = _objective(trial, L, S)
            if trial_obj > current_obj and feasible(trial):
                chosen, current_obj, improved = trial, trial_obj, True
                break
        if improved:
            continue
        # drop moves
        for i in chosen:
            trial = [c for c in chosen if c != i]
            trial_obj = _objective(trial, L, S)
            if trial_obj > current_obj and feasible(trial):
                chosen, current_obj, improved = trial, trial_obj, True
                break
        if improved:
            continue
        # swap moves
        for out in chosen:
            for i in range(n):
                if i in chosen_set:
                    continue
                trial = sorted([c for c in chosen if c != out] + [i])
                trial_obj = _objective(trial, L, S)
                if trial_obj > current_obj and feasible(trial):
                    chosen, current_obj, improved = trial, trial_obj, True
                    break
            if improved:
                break

    return selection_from_indices(problem, chosen)


# -- target size regression -------------------------------------------------

def paper_char_count(paper: Paper) -> int:
    return sum(len(s.text) for s in sentence_stream(paper))


def paper_size_features(paper: Paper) -> np.ndarray:
    """The 7 paper statistics the size regression is trained on."""
    sentences = sentence_stream(paper)
    n = len(sentences)
    chars = sum(len(s.text) for s in sentences)
    tokens = sum(len(s.tokens) for s in sentences)
    refs = sum(len(s.ref_marks) for s in sentences)
    return np.array(
        [
            chars,
            n,
            len(paper.sections),
            len(paper.graphics),
            refs,
            tokens / max(1, n),
            chars / max(1, n),
        ],
        dtype=np.float64,
    )


class SizeRegressor(BaseEstimator, RegressorMixin):
    """Ordinary least squares via normal equations with a ridge jitter."""

    def __init__(self, ridge: float = 1e-8):
        self.ridge = ridge

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        A = np.hstack([X, np.ones((len(X), 1))])
        gram = A.T @ A + self.ridge * np.eye(A.shape[1])
        self.coefficients_ = np.linalg.solve(gram, A.T @ y)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        A = np.hstack([X, np.ones((len(X), 1))])
        return A @ self.coefficients_


def train_size_model(pairs) -> SizeRegressor:
    """Fit the size regression on (paper stats, presentation chars) pairs."""
    pairs = list(pairs)
    if len(pairs) < 8:
        raise TooFewPairs(
            f"size regression needs >= 8 pairs, got {len(pairs)}"
        )
    X = np.array([np.asarray(f, dtype=np.float64) for f, _ in pairs])
    y = np.array([float(c) for _, c in pairs])
    return SizeRegressor().fit(X, y)


def predict_size(
    paper: Paper, model: SizeRegressor | None = None, fraction: float = 0.20
) -> int:
    """Target presentation size in characters.

    With a model: the regression output clamped to [200, paper chars]
    (the upper clamp wins for papers shorter than 200 characters).
    Without one: round(fraction * paper chars).
    """
    total = paper_char_count(paper)
    if model is None:
        return round(fraction * total)
    raw = float(model.predict(paper_size_features(paper).reshape(1, -1))[0])
    return min(max(round(raw), SIZE_FLOOR), total)


def save_size_model(model: SizeRegressor, path) -> None:
    doc = {
        "format_version": SIZE_MODEL_FORMAT_VERSION,
        "feature_names": list(SIZE_FEATURE_NAMES),
        "coefficients": [float(c) for c in model.coefficients_],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_size_model(path) -> SizeRegressor:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    model = SizeRegressor()
    model.coefficients_ = np.array(doc["coefficients"], dtype=np.float64)
    return model
