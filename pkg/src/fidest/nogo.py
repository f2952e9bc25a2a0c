"""Impossibility of exact symmetric fidelity sampling.

Two constructive tools: the decision-rule expansion for the four-outcome
product measurement (pi, 1-pi) (x) (tau, 1-tau), whose polynomial structure
forces the trivial rule, and a certificate generator showing that no test
operator reproduces the equality predicate on state pairs (value 1 on equal
pairs, 0 on orthogonal pairs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import qcore

FORCED_RULE_TOL = 1e-9
EQUAL_PAIR_TOL = 1e-6
_SEARCH_DEVIATION = 1e-6
_POLISH_STEPS = 20
_POLISH_STEP_SIZE = 0.1
_HAAR_CANDIDATES = 200


@dataclass(frozen=True)
class DecisionRule:
    """Vote-for-1 probabilities per outcome of the product measurement."""
    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self):
        for name in ("p11", "p10", "p01", "p00"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v!r} outside [0, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p10, self.p01, self.p00)


FORCED_RULE = DecisionRule(1.0, 0.0, 0.0, 0.0)


class ForcingCounterexample(NamedTuple):
    rho: np.ndarray
    pi: np.ndarray
    tau: np.ndarray
    deviation: float


@dataclass(frozen=True)
class ViolationCertificate:
    """Witness pair showing a test operator misses one of the two equality
    requirements; ``value`` is the achieved Tr((pi (x) tau) T)."""
    kind: str  # "equal_pair_fails" or "orthogonal_pair_fails"
    pi: np.ndarray
    tau: np.ndarray
    value: float
    bound_violated: float

    def verify(self, t, tol: float = 1e-9) -> bool:
        """Recompute the claimed value and the pair relation from scratch."""
        a = qcore.as_operator(t)
        v = np.kron(self.pi, self.tau)
        value = float(np.real(v.conj() @ a @ v))
        if abs(value - self.value) > tol:
            return False
        overlap = abs(np.vdot(self.pi, self.tau))
        if self.kind == "equal_pair_fails":
            return (float(np.max(np.abs(self.pi - self.tau))) == 0.0
                    and value < 1.0 - 1e-9)
        if self.kind == "orthogonal_pair_fails":
            return overlap <= 1e-10 and value > 1e-9
        return False


def vote_probability(rho, pi, tau, rule: DecisionRule) -> float:
    """Probability of voting 1: the four-term expansion over the product
    measurement outcomes, cross-checked against its grouped form."""
    r = qcore.as_operator(rho)
    p = qcore.as_operator(pi)
    t = qcore.as_operator(tau)
    d = p.shape[0]
    if t.shape[0] != d or r.shape[0] != d * d:
        raise ValueError(
            f"dimension mismatch: rho {r.shape[0]}, pi {d}, tau {t.shape[0]}")
    eye = np.eye(d, dtype=complex)
    p11, p10, p01, p00 = rule.as_tuple()

    def expect(op):
        return float(np.real(np.einsum("ij,ji->", r, op)))

    four_term = (p11 * expect(np.kron(p, t))
                 + p10 * expect(np.kron(p, eye - t))
                 + p01 * expect(np.kron(eye - p, t))
                 + p00 * expect(np.kron(eye - p, eye - t)))

    rho1 = qcore.partial_trace(r, [d, d], 0)
    rho2 = qcore.partial_trace(r, [d, d], 1)
    grouped = ((p11 - p10 - p01 + p00) * expect(np.kron(p, t))
               + (p10 - p00) * float(np.real(np.einsum("ij,ji->", rho1, p)))
               + (p01 - p00) * float(np.real(np.einsum("ij,ji->", rho2, t)))
               + p00)
    if abs(four_term - grouped) > 1e-10:
        raise RuntimeError(
            f"expansion identity violated: {four_term!r} vs {grouped!r}")
    return four_term


def _probe_pairs(d: int):
    """Deterministic (sigma1, sigma2, pi, tau) probes that expose each
    single-coordinate deviation of the decision rule."""
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    e1 = np.zeros(d, dtype=complex)
    e1[1] = 1.0
    return [
        (e0, e0, e0, e0),  # equal pair: vote probability is p11
        (e0, e0, e0, e1),  # orthogonal pair activating p10
        (e1, e1, e0, e1),  # orthogonal pair activating p01
        (e1, e0, e0, e1),  # orthogonal pair activating p00
    ]


def forcing_check(rule: DecisionRule, trials: int, seed,
                  d: int = 2) -> Optional[ForcingCounterexample]:
    """Search for a product input on which the rule fails to sample the
    overlap distribution.

    Returns None only when the rule already is (1, 0, 0, 0); that return says
    nothing about exact sampling being achievable (it is not, as
    ``theorem_one_check`` certifies for arbitrary preparations).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if d < 2:
        raise ValueError("d must be >= 2")
    forced = np.array(FORCED_RULE.as_tuple())
    if float(np.max(np.abs(np.array(rule.as_tuple()) - forced))) <= FORCED_RULE_TOL:
        return None

    rng = np.random.default_rng(seed)

    def attempt(s1, s2, pv, tv):
        rho = np.kron(qcore.pure_state_projector(s1),
                      qcore.pure_state_projector(s2))
        pi = qcore.pure_state_projector(pv)
        tau = qcore.pure_state_projector(tv)
        dev = abs(vote_probability(rho, pi, tau, rule)
                  - qcore.trace_fidelity(pi, tau))
        if dev > _SEARCH_DEVIATION:
            return ForcingCounterexample(rho=rho, pi=pi, tau=tau, deviation=dev)
        return None

    used = 0
    for s1, s2, pv, tv in _probe_pairs(d):
        if used >= trials:
            break
        used += 1
        found = attempt(s1, s2, pv, tv)
        if found is not None:
            return found
    while used < trials:
        used += 1
        s1, s2, pv = (qcore.haar_random_state(d, rng) for _ in range(3))
        # Cover the equal-pair case explicitly on alternating trials.
        tv = pv if used % 2 == 0 else qcore.haar_random_state(d, rng)
        found = attempt(s1, s2, pv, tv)
        if found is not None:
            return found
    raise RuntimeError(
        f"no counterexample above deviation {_SEARCH_DEVIATION} in {trials} trials; "
        "tolerance too tight for this rule")


def _equal_pair_minimum(t: np.ndarray, d: int, seed) -> tuple[float, np.ndarray]:
    """Minimize <phi phi|T|phi phi> over pure phi: Haar candidates plus
    greedy projected gradient refinement with numerical derivatives."""

    def value(phi):
        v = np.kron(phi, phi)
        return float(np.real(v.conj() @ t @ v))

    candidates = qcore.haar_random_states(d, _HAAR_CANDIDATES, seed)
    kron_batch = np.einsum("si,sj->sij", candidates, candidates).reshape(-1, d * d)
    vals = np.real(np.einsum("sa,ab,sb->s", kron_batch.conj(), t, kron_batch))
    best_idx = int(np.argmin(vals))
    best_phi = candidates[best_idx]
    best_val = float(vals[best_idx])

    h = 1e-6
    step = _POLISH_STEP_SIZE
    coords = np.concatenate([best_phi.real, best_phi.imag])
    for _ in range(_POLISH_STEPS):
        grad = np.zeros(2 * d)
        for i in range(2 * d):
            plus = coords.copy()
            plus[i] += h
            minus = coords.copy()
            minus[i] -= h
            fp = value(_coords_to_state(plus, d))
            fm = value(_coords_to_state(minus, d))
            grad[i] = (fp - fm) / (2 * h)
        norm = float(np.linalg.norm(grad))
        if norm < 1e-14:
            break
        trial = coords - step * grad / norm
        trial_val = value(_coords_to_state(trial, d))
        if trial_val < best_val:
            coords = trial / np.linalg.norm(trial)
            best_val = trial_val
            best_phi = _coords_to_state(coords, d)
        else:
            step /= 2
    return best_val, best_phi


def _coords_to_state(coords: np.ndarray, d: int) -> np.ndarray:
    v = coords[:d] + 1j * coords[d:]
    return v / np.linalg.norm(v)


def theorem_one_check(t, seed=0) -> ViolationCertificate:
    """Produce a violation certificate for any test operator on H (x) H.

    Either some equal pair (phi, phi) scores below 1, or the test dominates
    the symmetric projector and any orthogonal pair scores at least 1/2.
    """
    a = qcore.check_effect(t)
    dim = a.shape[0]
    d = math.isqrt(dim)
    if d * d != dim:
        raise ValueError(f"test operator dimension {dim} is not a perfect square")
    if d < 2:
        raise ValueError("need d >= 2 so that orthogonal state pairs exist")

    min_val, min_phi = _equal_pair_minimum(a, d, seed)
    if min_val < 1.0 - EQUAL_PAIR_TOL:
        v = np.kron(min_phi, min_phi)
        value = float(np.real(v.conj() @ a @ v))
        return ViolationCertificate(kind="equal_pair_fails", pi=min_phi,
                                    tau=min_phi, value=value, bound_violated=1.0)

    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    e1 = np.zeros(d, dtype=complex)
    e1[1] = 1.0
    v = np.kron(e0, e1)
    value = float(np.real(v.conj() @ a @ v))
    if value <= 1e-9:
        raise RuntimeError(
            "no certificate found: equal pairs pass yet an orthogonal pair "
            "scores ~0, which contradicts the no-go bound")
    return ViolationCertificate(kind="orthogonal_pair_fails", pi=e0, tau=e1,
                                value=value, bound_violated=0.0)


def certificate_to_json(cert: ViolationCertificate) -> dict:
    return {
        "kind": cert.kind,
        "value": cert.value,
        "bound_violated": cert.bound_violated,
        "pi": qcore.matrix_to_json(cert.pi),
        "tau": qcore.matrix_to_json(cert.tau),
    }
