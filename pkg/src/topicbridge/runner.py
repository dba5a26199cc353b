"""Run joint ONMF or a baseline over an interleaved schedule and collect metrics."""

import dataclasses
import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .factorization import (FactorPair, SolverOptions, new_batch_factors, nmf_factorize,
                            onmf_update, reconstruction_error)
from .joint import JointParams, joint_onmf_step
from .metrics import MetricRecord, assign_common_topics, cscore, dscore, top_terms
from .textpipe import tfidf_matrix

log = logging.getLogger(__name__)


class MethodKind(str, enum.Enum):
    JOINT = "JointONMF"
    ONMF = "ONMF"
    SNMF = "SNMF"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        for member in cls:
            if str(name).lower() == member.value.lower():
                return member
        raise ParameterError(f"unknown method {name!r}; choose from {[m.value for m in cls]}")


@dataclass
class TopicReport:
    time_index: int
    method: str
    month: str
    source: str
    common_topics: list
    distinct_prior: list
    distinct_new: list
    common_weights: np.ndarray = field(repr=False, compare=False, default=None)

    def to_json(self):
        def enc(topics):
            return [[{"term": t, "weight": w} for t, w in topic] for topic in topics]
        return {
            "time_index": self.time_index,
            "month": self.month,
            "source": self.source,
            "common": enc(self.common_topics),
            "distinct_prior": enc(self.distinct_prior),
            "distinct_new": enc(self.distinct_new),
        }


@dataclass
class TimeSeriesResult:
    method: MethodKind
    records: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    # (time_index, rows fed to the solver at that step)
    input_rows: list = field(default_factory=list)

    def means(self):
        if not self.records:
            return {"cscore": float("nan"), "dscore": float("nan"),
                    "re": float("nan"), "wall_clock": float("nan")}
        return {name: float(np.mean([getattr(r, name) for r in self.records]))
                for name in ("cscore", "dscore", "re", "wall_clock")}


def _warn(result, time_index, message):
    log.warning("%s step %d: %s", result.method.value, time_index, message)
    result.warnings.append({"time_index": time_index, "message": message})


def _topic_terms(H, rows, vocab, count):
    return [top_terms(H[r], vocab, count, with_weights=True) for r in rows]


def run_stream(schedule, method, params, vocab, top_n=5):
    """Process the schedule step by step.

    The first non-empty step is factorized with plain NMF to seed the prior
    topics; every later non-empty step yields one metric record and one topic
    report. Empty steps are skipped and logged. When a batch has fewer rows
    than k, the joint solver runs that step with ``k' = rows`` topics
    (``k_c`` reduced first to leave at least one distinct topic).
    """
    method = MethodKind.parse(method)
    if len(schedule) == 0:
        raise ParameterError("schedule is empty")
    n = len(vocab)
    if params.k > n:
        raise ParameterError(f"k={params.k} exceeds vocabulary size {n}")
    top_n = min(top_n, n)

    result = TimeSeriesResult(method, config=_snapshot(params, method))
    opts = params.solver
    H_prev = None
    onmf_state = None
    history = []

    for step in schedule:
        t = step.time_index
        if step.empty:
            _warn(result, t, f"gap: no {step.source.value} documents in {step.month:%Y-%m}; skipped")
            continue
        U = tfidf_matrix(step.documents, vocab)
        step_opts = dataclasses.replace(opts, seed=opts.seed + t)
        m = U.shape[0]

        if H_prev is None:
            k0 = min(params.k, m, n)
            if k0 < params.k:
                _warn(result, t, f"k reduced from {params.k} to {k0} for the initial batch of {m} rows")
            init = nmf_factorize(U, k0, step_opts)
            H_prev, onmf_state = init.H, init
            history.append(U)
            result.input_rows.append((t, m))
            continue

        k_prev = H_prev.shape[0]
        start = time.perf_counter()
        if method is MethodKind.JOINT:
            k_step = min(params.k, m)
            if k_step < 2:
                _warn(result, t, f"batch of {m} row(s) cannot hold a common and a distinct topic; skipped")
                continue
            k_c = min(params.k_c, k_step - 1)
            if k_step < params.k:
                _warn(result, t, f"k reduced from {params.k} to {k_step} (k_c={k_c}) for a batch of {m} rows")
            J = joint_onmf_step(H_prev, U, params, k_c=k_c, k_d=k_step - k_c)
            c_new, d_new = J.H_U[:k_c], J.H_U[k_c:]
            c_prev, d_prev = J.H_star[:k_c], J.H_star[k_c:]
            re = reconstruction_error(U, FactorPair(J.W_U, J.H_U))
            H_new = J.H_U
            common_rows, dprior_rows, dnew_rows = range(k_c), range(k_c, k_step), range(k_c, k_step)
            prior_for_report = J.H_star
            rows_in = m
        else:
            if method is MethodKind.ONMF:
                onmf_state = onmf_update(onmf_state, U, step_opts)
                fit = onmf_state
                rows_in = k_prev + m
            else:
                history.append(U)
                V = np.vstack(history)
                fit = nmf_factorize(V, k_prev, step_opts)
                rows_in = V.shape[0]
            H_new = fit.H
            re = reconstruction_error(U, new_batch_factors(fit, m))
            k_c = min(params.k_c, k_prev - 1) if k_prev > 1 else 1
            a = assign_common_topics(H_prev, H_new, k_c)
            common_rows, dprior_rows, dnew_rows = a.common_new, a.distinct_prev, a.distinct_new
            c_prev, c_new = H_prev[a.common_prev], H_new[a.common_new]
            d_prev, d_new = H_prev[list(a.distinct_prev)], H_new[list(a.distinct_new)]
            prior_for_report = H_prev

        cs = cscore(c_prev, c_new)
        ds = dscore(d_prev, d_new) if len(d_prev) else 0.0
        elapsed = time.perf_counter() - start

        result.records.append(MetricRecord(t, method.value, cs, ds, re, elapsed))
        result.reports.append(TopicReport(
            time_index=t, method=method.value, month=f"{step.month:%Y-%m}",
            source=step.source.value,
            common_topics=_topic_terms(H_new, common_rows, vocab, top_n),
            distinct_prior=_topic_terms(prior_for_report, dprior_rows, vocab, top_n),
            distinct_new=_topic_terms(H_new, dnew_rows, vocab, top_n),
            common_weights=np.array(H_new[list(common_rows)]),
        ))
        result.input_rows.append((t, rows_in))
        H_prev = H_new
    return result


def _snapshot(params, method):
    return {
        "method": method.value,
        "k_c": params.k_c, "k_d": params.k_d,
        "alpha": params.alpha, "beta": params.beta,
        "max_iters": params.solver.max_iters, "tol": params.solver.tol,
        "seed": params.solver.seed, "epsilon": params.solver.epsilon,
        "step_size": params.solver.step_size,
        "dscore_epsilon": params.dscore_epsilon, "kl_cap": params.kl_cap,
    }


@dataclass
class Comparison:
    results: dict

    def means(self):
        return {m.value: r.means() for m, r in self.results.items()}

    def table(self):
        """Rows ``(time_index, method, cscore, dscore, re, wall_clock)`` ordered by step then method."""
        rows = [(rec.time_index, rec.method, rec.cscore, rec.dscore, rec.re, rec.wall_clock)
                for r in self.results.values() for rec in r.records]
        order = {m.value: i for i, m in enumerate(self.results)}
        return sorted(rows, key=lambda row: (row[0], order[row[1]]))


def compare_methods(schedule, methods, params, vocab, top_n=5):
    """Run every method on the same schedule with the same seed."""
    methods = [MethodKind.parse(m) for m in methods]
    if not methods:
        raise ParameterError("at least one method is required")
    return Comparison({m: run_stream(schedule, m, params, vocab, top_n) for m in dict.fromkeys(methods)})


def default_params(k_c=2, k_d=3, alpha=1000.0, beta=0.1, max_iters=100, tol=1e-5, seed=42):
    return JointParams(k_c=k_c, k_d=k_d, alpha=alpha, beta=beta,
                       solver=SolverOptions(max_iters=max_iters, tol=tol, seed=seed))
