"""Pseudo-arclength tracing of unilateral branches and their classification.

A branch starts at a regular zero (lambda0, u0) on the base slice and is
followed in one lambda-direction (``side``) until one of the global
alternatives shows up: the branch grows past ``norm_cap`` (UNBOUNDED), runs
into the boundary of the admissible set (BOUNDARY), or comes back to the
base slice at a different state (BASE_RETURN). Hitting the lambda window or
the step budget first leaves the alternative undetermined.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from ._linalg import REGULARITY_RTOL, det_sign, raw_det_sign
from .degree import SliceCrossing, local_index
from .errors import (DomainError, DomainExit, EvaluationError, NotAZeroError,
                     ReductionError, SingularPointError, StepFailure)
from .problem_model import DomainSpec, ParameterizedSystem, Point, inside_domain

log = logging.getLogger(__name__)

BISECTION_ITERS = 60


class Side(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> float:
        return 1.0 if self is Side.PLUS else -1.0


class EventKind(str, Enum):
    FOLD = "FOLD"
    SINGULAR = "SINGULAR"
    BOUNDARY_APPROACH = "BOUNDARY_APPROACH"
    BLOWUP = "BLOWUP"
    BASE_RETURN = "BASE_RETURN"
    STEP_FAILURE = "STEP_FAILURE"


class Classification(str, Enum):
    UNBOUNDED = "UNBOUNDED"
    BOUNDARY = "BOUNDARY"
    BASE_RETURN = "BASE_RETURN"
    WINDOW_EXHAUSTED = "WINDOW_EXHAUSTED"
    STALLED = "STALLED"


TERMINAL_EVENTS = {EventKind.BLOWUP: Classification.UNBOUNDED,
                   EventKind.BOUNDARY_APPROACH: Classification.BOUNDARY,
                   EventKind.BASE_RETURN: Classification.BASE_RETURN}

ALTERNATIVE_TEXT = {
    Classification.UNBOUNDED: "(i)/(a): branch is unbounded (size exceeded norm_cap)",
    Classification.BOUNDARY: "(ii)/(b): branch approaches the boundary of the admissible set",
    Classification.BASE_RETURN: "(iii)/(c): branch returns to the base slice at u1 != u0",
    Classification.WINDOW_EXHAUSTED: "alternative undetermined within the lambda window / run budget",
    Classification.STALLED: "inconclusive: step size fell below h_min",
}


@dataclass(frozen=True)
class StepControl:
    h_init: float = 0.02
    h_min: float = 1e-7
    h_max: float = 0.1
    newton_tol: float = 1e-10
    newton_max_iter: int = 12
    grow: float = 1.5
    shrink: float = 0.5
    grow_after: int = 2
    max_steps: int = 20_000
    max_arclength: float = 1e4
    min_turn_cos: float = 0.9
    return_separation: float = 1e-3

    def __post_init__(self):
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not self.grow > 1.0 or not 0.0 < self.shrink < 1.0:
            raise ValueError("need grow > 1 and 0 < shrink < 1")


@dataclass(frozen=True)
class Event:
    kind: EventKind
    location: Point
    step: int
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind.value, "step": self.step, "lambda": self.location.lam,
                "u_inf_norm": float(np.max(np.abs(self.location.u))),
                "data": self.data}


@dataclass
class Branch:
    side: Side
    points: list = field(default_factory=list)
    tangents: list = field(default_factory=list)
    events: list = field(default_factory=list)
    classification: Classification | None = None
    termination: str = ""
    evidence: dict = field(default_factory=dict)

    @property
    def start(self) -> Point:
        return self.points[0]

    def terminal_event(self):
        for ev in reversed(self.events):
            if ev.kind in TERMINAL_EVENTS:
                return ev
        return None

    def base_returns(self):
        return [ev for ev in self.events if ev.kind is EventKind.BASE_RETURN]

    def lambdas(self):
        return np.array([p.lam for p in self.points])


# --------------------------------------------------------------------------
# predictor and corrector

def tangent(system: ParameterizedSystem, point: Point, previous_tangent=None,
            side: Side | str | None = None) -> np.ndarray:
    """Unit kernel vector of the total Jacobian [F_lambda | F_u].

    Oriented along ``previous_tangent`` when given, otherwise so that its
    lambda-component has the sign of ``side``.
    """
    J = system.total_jacobian(point)
    _, s, vt = np.linalg.svd(J)
    if s.size == 0 or s[0] == 0.0 or s[-1] <= REGULARITY_RTOL * s[0]:
        raise SingularPointError("total Jacobian is rank deficient (kernel dim >= 2)", point)
    t = vt[-1].copy()
    t /= np.linalg.norm(t)
    if previous_tangent is not None:
        if np.dot(t, previous_tangent) < 0:
            t = -t
    elif side is not None:
        sgn = Side(side).sign
        if t[0] == 0.0:
            raise SingularPointError("tangent has no lambda-component; cannot orient by side", point)
        if np.sign(t[0]) != sgn:
            t = -t
    return t


def correct(system: ParameterizedSystem, predicted: Point, tangent_vec,
            ctl: StepControl = StepControl(), domain: DomainSpec | None = None):
    """Newton on {F = 0, <x - x_pred, t> = 0}; returns ``(point, iterations)``."""
    domain = domain or system.domain
    x = predicted.vector()
    x_pred = x.copy()
    t = np.asarray(tangent_vec, dtype=float)
    n = system.n_state
    for it in range(ctl.newton_max_iter + 1):
        p = Point.from_vector(x)
        try:
            F = system.F(p)
        except (DomainError, EvaluationError) as exc:
            raise StepFailure(f"residual evaluation failed: {exc}") from exc
        if np.linalg.norm(F, np.inf) <= ctl.newton_tol and abs(np.dot(x - x_pred, t)) <= 1e-8 * (1 + np.linalg.norm(x)):
            ok, m = inside_domain(domain, p)
            if not ok:
                raise DomainExit(f"corrected point outside domain (margin={m:.3g})", p, m)
            return p, it
        if it == ctl.newton_max_iter:
            break
        A = np.empty((n + 1, n + 1))
        A[:n] = system.total_jacobian(p)
        A[n] = t
        rhs = np.concatenate((-F, [-np.dot(x - x_pred, t)]))
        try:
            dx = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise StepFailure("singular augmented Jacobian") from exc
        if not np.all(np.isfinite(dx)):
            raise StepFailure("non-finite Newton update")
        x = x + dx
    raise StepFailure(f"corrector did not converge in {ctl.newton_max_iter} iterations")


def _correct_between(system, a: Point, b: Point, s: float, ctl: StepControl):
    """A point on the solution curve between two nearby accepted points.

    Predicts on the chord at fraction ``s`` and corrects orthogonally to it.
    """
    xa, xb = a.vector(), b.vector()
    d = xb - xa
    d /= np.linalg.norm(d)
    pred = Point.from_vector(xa + s * (xb - xa))
    tight = StepControl(h_init=ctl.h_init, h_min=ctl.h_min, h_max=ctl.h_max,
                        newton_tol=ctl.newton_tol, newton_max_iter=max(ctl.newton_max_iter, 30))
    p, _ = correct(system, pred, d, tight, domain=DomainSpec())
    return p


def _bisect(system, a, b, predicate, ctl):
    """Bisection on the chord fraction; ``predicate(p)`` is False at a, True at b."""
    lo, hi = 0.0, 1.0
    p_hi = b
    chord = a.distance(b)
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        p = _correct_between(system, a, b, mid, ctl)
        if predicate(p):
            hi, p_hi = mid, p
        else:
            lo = mid
        if (hi - lo) * chord <= 1e-14:
            break
    return p_hi, hi


def _polish_on_slice(system, point: Point, lam: float, tol: float):
    """Newton in u at fixed lambda; returns None if the slice map is singular there."""
    u = np.array(point.u)
    for _ in range(20):
        F = np.asarray(system.residual(lam, u), dtype=float)
        if np.linalg.norm(F, np.inf) <= tol * 1e-2:
            break
        Fu = np.atleast_2d(system.jac_u(lam, u))
        if det_sign(Fu) == 0:
            return None
        u = u - np.linalg.solve(Fu, F)
    p = Point(lam, u)
    if system.residual_norm(p) > tol or p.distance(point) > 1e-6:
        return None
    return p


# --------------------------------------------------------------------------
# events

def detect_events(system: ParameterizedSystem, domain: DomainSpec, prev: Point, next_: Point,
                  start: Point | None = None, ctl: StepControl = StepControl(),
                  prev_tangent=None, next_tangent=None, step: int = 0) -> list[Event]:
    """Events on the arc (prev, next], in order of occurrence along the arc."""
    found = []  # (chord fraction, Event)

    sp, sn = raw_det_sign(system.Fu(prev)), raw_det_sign(system.Fu(next_))
    if sp != sn and sp != 0 and sn != 0:
        loc, frac = _bisect(system, prev, next_, lambda p: raw_det_sign(system.Fu(p)) == sn, ctl)
        tp = prev_tangent if prev_tangent is not None else tangent(system, prev)
        tn = next_tangent if next_tangent is not None else tangent(system, next_, tp)
        reverses = np.sign(tp[0]) != np.sign(tn[0])
        kind = EventKind.FOLD if reverses else EventKind.SINGULAR
        found.append((frac, Event(kind, loc, step, {
            "det_signs": [sp, sn],
            "tangent_lambda": [float(tp[0]), float(tn[0])],
        })))

    lam0 = domain.base_lambda
    dp, dn = prev.lam - lam0, next_.lam - lam0
    if dp * dn < 0 or (dn == 0.0 and dp != 0.0):
        if dn == 0.0:
            loc, frac = next_, 1.0
        else:
            after = np.sign(dn)
            loc, frac = _bisect(system, prev, next_,
                                lambda p: np.sign(p.lam - lam0) == after or p.lam == lam0, ctl)
        polished = _polish_on_slice(system, loc, lam0, ctl.newton_tol)
        if polished is not None:
            loc = polished
        far = start is None or np.linalg.norm(loc.u - start.u) > ctl.return_separation
        if far:
            found.append((frac, Event(EventKind.BASE_RETURN, loc, step, {
                "u1": [float(v) for v in loc.u],
                "lambda_error": abs(loc.lam - lam0),
                "separation": float(np.linalg.norm(loc.u - start.u)) if start is not None else None,
            })))

    # threshold events are located where the monitor crosses its threshold,
    # so their position does not depend on the step size
    def near_boundary(p):
        return float(domain.margin(p.lam, p.u)) < domain.boundary_threshold

    if near_boundary(next_):
        loc, frac = next_, 1.0
        if not near_boundary(prev):
            loc, frac = _bisect(system, prev, next_, near_boundary, ctl)
        found.append((frac, Event(EventKind.BOUNDARY_APPROACH, loc, step, {
            "margin": float(domain.margin(loc.lam, loc.u)),
            "threshold": domain.boundary_threshold})))

    def too_large(p):
        return float(domain.size(p.lam, p.u)) > domain.norm_cap

    if too_large(next_):
        loc, frac = next_, 1.0
        if not too_large(prev):
            loc, frac = _bisect(system, prev, next_, too_large, ctl)
        found.append((frac, Event(EventKind.BLOWUP, loc, step, {
            "size": float(domain.size(loc.lam, loc.u)), "norm_cap": domain.norm_cap})))

    found.sort(key=lambda fe: fe[0])
    return [e for _, e in found]


# --------------------------------------------------------------------------
# tracing

def _check_start(system, domain, start, ctl):
    r = system.residual_norm(start)
    if r > ctl.newton_tol:
        raise NotAZeroError(f"start residual {r:.3g} exceeds newton_tol {ctl.newton_tol:.1g}")
    if abs(start.lam - domain.base_lambda) > 1e-12:
        raise ValueError("start must lie on the base slice lambda = base_lambda")
    ok, m = inside_domain(domain, start)
    if not ok:
        raise DomainError(f"start outside the domain (margin={m:.3g})")
    if det_sign(system.Fu(start)) == 0:
        raise SingularPointError("start is a singular zero; use the singular module", start)


def _window_edge(system, prev, new, window, ctl):
    lo, hi = window
    edge = hi if new.lam > hi else lo
    inside = (lambda p: p.lam >= edge) if edge == hi else (lambda p: p.lam <= edge)
    loc, _ = _bisect(system, prev, new, inside, ctl)
    polished = _polish_on_slice(system, loc, edge, ctl.newton_tol)
    return polished if polished is not None else loc


def trace(system: ParameterizedSystem, domain: DomainSpec | None, start: Point,
          side: Side | str, ctl: StepControl = StepControl()) -> Branch:
    """Follow the branch through ``start`` in the lambda-direction ``side``."""
    domain = domain or system.domain
    side = Side(side)
    _check_start(system, domain, start, ctl)

    branch = Branch(side=side)
    t = tangent(system, start, side=side)
    branch.points.append(start)
    branch.tangents.append(t)
    cur = start
    h = ctl.h_init
    successes = 0
    arclength = 0.0
    window = domain.lambda_window
    termination = "budget"

    for step in range(1, ctl.max_steps + 1):
        pred = Point.from_vector(cur.vector() + h * t)
        try:
            new, iters = correct(system, pred, t, ctl, domain)
            dist = new.distance(cur)
            if dist > 2 * ctl.h_max or dist < 0.05 * ctl.h_min:
                raise StepFailure(f"step length {dist:.3g} outside admissible range")
            t_new = tangent(system, new, t)
            if np.dot(t_new, t) < ctl.min_turn_cos:
                raise StepFailure("tangent turned too sharply; possible branch jump")
        except SingularPointError as exc:
            if exc.point is None or system.residual_norm(exc.point) > ctl.newton_tol:
                raise
            new = exc.point
            try:
                restart = _hand_off(system, new, t, ctl)
            except ReductionError as rexc:
                log.warning("singular hand-off failed at lambda=%g: %s", new.lam, rexc)
                branch.events.append(Event(EventKind.SINGULAR, new, len(branch.points),
                                           {"handoff": str(rexc)}))
                branch.points.append(new)
                branch.tangents.append(t)
                termination = "stalled"
                break
            branch.events.append(Event(EventKind.SINGULAR, new, len(branch.points), restart.info))
            branch.points.append(new)
            branch.tangents.append(t)
            cur, t = restart.point, restart.tangent
            branch.points.append(cur)
            branch.tangents.append(t)
            continue
        except StepFailure as exc:
            h *= ctl.shrink
            successes = 0
            log.debug("step %d rejected (%s); h -> %.3g", step, exc, h)
            if h < ctl.h_min:
                branch.events.append(Event(EventKind.STEP_FAILURE, cur, len(branch.points) - 1,
                                           {"reason": str(exc)}))
                termination = "stalled"
                break
            continue

        edge_hit = not (window[0] <= new.lam <= window[1])
        if edge_hit:
            new = _window_edge(system, cur, new, window, ctl)
            t_new = tangent(system, new, t)

        events = detect_events(system, domain, cur, new, start, ctl, t, t_new, len(branch.points))
        terminal = next((e for e in events if e.kind in TERMINAL_EVENTS), None)
        if terminal is not None:
            events = events[:events.index(terminal) + 1]
            new = terminal.location
            t_new = tangent(system, new, t)
        branch.events.extend(events)
        branch.points.append(new)
        branch.tangents.append(t_new)
        arclength += new.distance(cur)
        cur, t = new, t_new

        if terminal is not None:
            termination = terminal.kind.value.lower()
            break
        if edge_hit:
            termination = "window"
            break
        if arclength > ctl.max_arclength:
            termination = "budget"
            break
        successes += 1
        if successes >= ctl.grow_after and iters <= 4:
            h = min(h * ctl.grow, ctl.h_max)
            successes = 0

    branch.termination = termination
    branch.classification, branch.evidence = classify(branch, domain, system)
    return branch


@dataclass(frozen=True)
class _Restart:
    point: Point
    tangent: np.ndarray
    info: dict


def _hand_off(system, point, incoming, ctl):
    from .singular import ls_reduce, switch_branch

    red = ls_reduce(system, point, radius=min(0.1, ctl.h_max))
    res = switch_branch(red, incoming)
    return _Restart(res.point, res.tangent, res.info)


def classify(branch: Branch, domain: DomainSpec, system: ParameterizedSystem | None = None):
    """Map the terminal event to a global alternative; returns ``(label, evidence)``."""
    ev = branch.terminal_event()
    if ev is not None:
        label = TERMINAL_EVENTS[ev.kind]
    elif branch.termination == "stalled":
        label = Classification.STALLED
    else:
        label = Classification.WINDOW_EXHAUSTED
    last = branch.points[-1]
    margins = [float(domain.margin(p.lam, p.u)) for p in branch.points]
    sizes = [float(domain.size(p.lam, p.u)) for p in branch.points]
    evidence = {
        "alternative": ALTERNATIVE_TEXT[label],
        "termination": branch.termination or "unknown",
        "n_points": len(branch.points),
        "final_lambda": last.lam,
        "final_size": sizes[-1],
        "max_size": max(sizes),
        "final_margin": margins[-1],
        "min_margin": min(margins),
        "norm_cap": domain.norm_cap,
        "lambda_window": [domain.lambda_window[0], domain.lambda_window[1]],
        "base_crossings": [{"lambda": e.location.lam, "u": [float(v) for v in e.location.u]}
                           for e in branch.base_returns()],
        "events": [e.kind.value for e in branch.events],
    }
    if system is not None:
        evidence["final_residual"] = system.residual_norm(last)
    return label, evidence


def base_crossings(system: ParameterizedSystem, branches: Sequence[Branch],
                   dedup_tol: float = 1e-6) -> list[SliceCrossing]:
    """Start point plus every base-slice return, with local indices, deduplicated."""
    if not branches:
        return []
    lam0 = branches[0].start.lam
    pts = [branches[0].start]
    for br in branches:
        for ev in br.base_returns():
            pts.append(ev.location)
    out: list[SliceCrossing] = []
    for p in pts:
        if any(np.linalg.norm(p.u - c.u) <= dedup_tol * (1 + np.linalg.norm(c.u)) for c in out):
            continue
        out.append(SliceCrossing(np.array(p.u), local_index(system, Point(lam0, p.u)), lam0))
    return out
