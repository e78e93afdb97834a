"""
Closed-form estimator variances for each shot allocation strategy.

All formulas take exact per-term moments. <H> below always means the
sampled part sum_i c_i <h_i>; the identity constant shifts every estimate
equally and never contributes variance.
"""
from __future__ import annotations
from dataclasses import dataclass
from core.config import settings
from core.errors import RegularizationError, ShotFloorError
from services.quantum.hamiltonian import Hamiltonian, probabilities
from services.quantum.simulator import StateVector, exact_expectation, second_moment
from services.sampling.strategies import (
    Strategy,
    hybrid_split,
    single_sampling_probabilities,
    strategy_floor,
    stable_floor,
)
import numpy as np


@dataclass(frozen=True)
class TermMoments:
    expectations: np.ndarray
    second_moments: np.ndarray

    @property
    def sigma_sq(self) -> np.ndarray:
        return np.maximum(self.second_moments - self.expectations ** 2, 0.0)

    @property
    def sigmas(self) -> np.ndarray:
        return np.sqrt(self.sigma_sq)

    @classmethod
    def from_arrays(cls, expectations, second_moments=None) -> TermMoments:
        expectations = np.asarray(expectations, dtype=float)
        if second_moments is None:
            second_moments = np.ones_like(expectations)
        return cls(expectations, np.asarray(second_moments, dtype=float))


def term_moments(state: StateVector, hamiltonian: Hamiltonian) -> TermMoments:
    ops = hamiltonian.operators
    return TermMoments(
        np.array([exact_expectation(state, op) for op in ops]),
        np.array([second_moment(state, op) for op in ops]),
    )


def _sampled_energy(c: np.ndarray, moments: TermMoments) -> float:
    return float(np.dot(c, moments.expectations))


def multinomial_covariance(p: np.ndarray, n: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return n * (np.diag(p) - np.outer(p, p))


def weighted_variance(
    c: np.ndarray,
    moments: TermMoments,
    shot_weights: np.ndarray,
    expected_shots: np.ndarray,
    shot_covariance: np.ndarray,
) -> float:
    """Variance of sum_i c_i w_i sum_{j<=s_i} r_ij for arbitrary per-shot weights w_i."""
    a = np.asarray(c, dtype=float) * shot_weights
    diagonal = np.sum(a ** 2 * expected_shots * moments.sigma_sq)
    b = a * moments.expectations
    return float(diagonal + b @ shot_covariance @ b)


def var_general(c, moments: TermMoments, expected_shots, shot_covariance) -> float:
    expected_shots = np.asarray(expected_shots, dtype=float)
    if np.any(expected_shots <= 0):
        raise ValueError("Expected shot counts must all be positive")
    return weighted_variance(c, moments, 1.0 / expected_shots, expected_shots, np.asarray(shot_covariance, dtype=float))


def var_uds(c, moments: TermMoments, s_tot: float) -> float:
    c = np.asarray(c, dtype=float)
    return float(c.shape[0] / s_tot * np.sum(c ** 2 * moments.sigma_sq))


def var_wds(c, moments: TermMoments, s_tot: float) -> float:
    abs_c = np.abs(np.asarray(c, dtype=float))
    return float(abs_c.sum() / s_tot * np.sum(abs_c * moments.sigma_sq))


def var_wrs(c, moments: TermMoments, s_tot: float) -> float:
    c = np.asarray(c, dtype=float)
    abs_c = np.abs(c)
    energy = _sampled_energy(c, moments)
    return float(abs_c.sum() / s_tot * np.sum(abs_c * moments.second_moments) - energy ** 2 / s_tot)


def var_whs(c, moments: TermMoments, s_tot: float, s_rand: float) -> float:
    c = np.asarray(c, dtype=float)
    abs_c = np.abs(c)
    m = abs_c.sum()
    energy = _sampled_energy(c, moments)
    return float(
        m / s_tot * np.sum(abs_c * moments.sigma_sq)
        + s_rand * m / s_tot ** 2 * np.sum(abs_c * moments.expectations ** 2)
        - s_rand * energy ** 2 / s_tot ** 2
    )


def var_wss(c, moments: TermMoments, s_tot: float) -> float:
    c = np.asarray(c, dtype=float)
    abs_c = np.abs(c)
    m = abs_c.sum()
    energy = _sampled_energy(c, moments)
    return float(
        m / s_tot * np.sum(abs_c * moments.sigma_sq)
        + m * np.sum(abs_c * moments.expectations ** 2)
        - energy ** 2
    )


def wss_floor(c, moments: TermMoments) -> float:
    """Variance WSS keeps however many shots are spent."""
    abs_c = np.abs(np.asarray(c, dtype=float))
    return float(abs_c.sum() * np.sum(abs_c * moments.expectations ** 2) - _sampled_energy(c, moments) ** 2)


def _regularized_sigmas(sigmas, sigma_min: float | None, regularize: bool) -> np.ndarray:
    sigma_min = settings.sigma_min if sigma_min is None else sigma_min
    sigmas = np.asarray(sigmas, dtype=float)
    if regularize:
        return np.maximum(sigmas, sigma_min)
    if np.any(sigmas < sigma_min):
        raise RegularizationError(
            f"sigma below {sigma_min:g} leaves a term unmeasured; enable regularization"
        )
    return sigmas


def allocate_prior_sigma(
    c, sigmas, s_tot: int, sigma_min: float | None = None, regularize: bool = True
) -> np.ndarray:
    abs_c = np.abs(np.asarray(c, dtype=float))
    sigmas = _regularized_sigmas(sigmas, sigma_min, regularize)
    weights = abs_c * sigmas
    return stable_floor(s_tot * weights / weights.sum())


def var_prior_sigma_deterministic(c, sigmas, s_tot: float) -> float:
    abs_c = np.abs(np.asarray(c, dtype=float))
    return float(np.dot(abs_c, sigmas) ** 2 / s_tot)


def var_prior_sigma_random(
    c, moments: TermMoments, s_tot: float, sigma_min: float | None = None, regularize: bool = True
) -> float:
    c = np.asarray(c, dtype=float)
    abs_c = np.abs(c)
    sigmas = _regularized_sigmas(moments.sigmas, sigma_min, regularize)
    scale = np.dot(abs_c, sigmas)
    energy = _sampled_energy(c, moments)
    return float(scale / s_tot * np.sum(abs_c * moments.second_moments / sigmas) - energy ** 2 / s_tot)


def _check_floor(strategy: Strategy, hamiltonian: Hamiltonian, s_tot: int):
    floor = strategy_floor(strategy, hamiltonian)
    if s_tot < floor:
        raise ShotFloorError(strategy.value, s_tot, floor)


def analytic_variance(
    strategy: Strategy,
    hamiltonian: Hamiltonian,
    moments: TermMoments,
    s_tot: int,
    uniform_single: bool = False,
) -> float:
    """Closed-form variance of each strategy, ignoring integer-rounding corrections."""
    _check_floor(strategy, hamiltonian, s_tot)
    c = hamiltonian.coefficients
    if strategy is Strategy.UDS:
        n_terms = hamiltonian.n_terms
        return var_uds(c, moments, n_terms * (s_tot // n_terms))
    if strategy is Strategy.WDS:
        return var_wds(c, moments, s_tot)
    if strategy is Strategy.WRS:
        return var_wrs(c, moments, s_tot)
    if strategy is Strategy.WHS:
        _, s_rand = hybrid_split(hamiltonian, s_tot)
        return var_whs(c, moments, s_tot, s_rand)
    if uniform_single:
        return exact_variance(strategy, hamiltonian, moments, s_tot, uniform_single=True)
    return var_wss(c, moments, s_tot)


def exact_variance(
    strategy: Strategy,
    hamiltonian: Hamiltonian,
    moments: TermMoments,
    s_tot: int,
    strict_hybrid: bool = False,
    uniform_single: bool = False,
) -> float:
    """Variance of the estimator as implemented, floors and rounding included."""
    _check_floor(strategy, hamiltonian, s_tot)
    c = hamiltonian.coefficients
    p = probabilities(hamiltonian)
    n_terms = hamiltonian.n_terms

    if strategy is Strategy.UDS:
        shots = np.full(n_terms, float(s_tot // n_terms))
        return var_general(c, moments, shots, np.zeros((n_terms, n_terms)))
    if strategy is Strategy.WDS:
        shots = stable_floor(s_tot * p).astype(float)
        return var_general(c, moments, shots, np.zeros((n_terms, n_terms)))
    if strategy is Strategy.WRS:
        return var_general(c, moments, p * s_tot, multinomial_covariance(p, s_tot))
    if strategy is Strategy.WHS:
        deterministic, s_rand = hybrid_split(hamiltonian, s_tot)
        expected = deterministic + p * s_rand
        covariance = multinomial_covariance(p, s_rand)
        if strict_hybrid:
            return weighted_variance(c, moments, 1.0 / (p * s_tot), expected, covariance)
        return var_general(c, moments, expected, covariance)

    q = single_sampling_probabilities(hamiltonian, uniform_single)
    # one categorical draw scaled by s_tot
    return var_general(c, moments, q * s_tot, s_tot ** 2 * multinomial_covariance(q, 1))
