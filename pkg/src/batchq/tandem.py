"""Queues in series: departures feed the next stage within the same slot.

The update order inside a slot is fixed: stage 1 receives the external
arrival and serves; its departures are the stage-2 arrivals of the same
slot, and so on down the line.  For Bernoulli-geometric stages whose
(q_r, beta_r) all sit on the arrival's one-parameter family, the stage
queue lengths at a fixed time are independent with the single-queue
stationary marginals (the product-form theorem), and every stage's
departure process is distributed like the external arrival process.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import DistSpec, mean, sample_n
from .queue_core import QueueParams, StationaryLaw, Trace, _lindley, stationary_law
from .stats import EmpiricalPmf, TestResult, chi_square_gof, independence_chi2
from .streams import RandomStream

__all__ = ["TandemConfig", "TandemTrace", "simulate_tandem", "verify_product_form"]


@dataclass(frozen=True)
class TandemConfig:
    """R queues in series: one arrival spec and one service spec per stage."""

    arrival: DistSpec
    services: tuple[DistSpec, ...]

    def __init__(self, arrival: DistSpec, services: Sequence[DistSpec]):
        object.__setattr__(self, "arrival", arrival)
        object.__setattr__(self, "services", tuple(services))
        if len(self.services) < 1:
            raise ValueError("need at least one stage")

    @property
    def is_stable(self) -> bool:
        """Every stage's mean service strictly exceeds the mean arrival."""
        return all(mean(sv) > mean(self.arrival) for sv in self.services)

    @property
    def stages(self) -> int:
        return len(self.services)

    @staticmethod
    def bergeom(params: QueueParams, stages: int) -> "TandemConfig":
        """Homogeneous Bernoulli-geometric tandem from one parameter set."""
        return TandemConfig(params.arrival_spec, [params.service_spec] * stages)

    def stage_params(self, r: int) -> QueueParams:
        """BerGeom 4-tuple for stage r (arrival side is the external arrival)."""
        if self.arrival.kind != "ber_geom" or self.services[r].kind != "ber_geom":
            raise ValueError("stage_params requires Bernoulli-geometric specs")
        sv = self.services[r]
        return QueueParams(p=self.arrival.p, alpha=self.arrival.alpha, q=sv.p, beta=sv.alpha)


@dataclass
class TandemTrace:
    """Aligned per-stage traces; stage r's arrivals equal stage r-1's departures."""

    config: TandemConfig
    seed: int | None
    stages: list[Trace] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.stages[0])

    @property
    def R(self) -> int:
        return len(self.stages)

    def check_feed_forward(self) -> None:
        """Exact conservation: departures of stage r are arrivals of stage r+1."""
        for r in range(self.R - 1):
            if not np.array_equal(self.stages[r].d, self.stages[r + 1].a):
                raise ValueError(f"feed-forward identity violated between stages {r+1} and {r+2}")

    def to_csv(self, path) -> None:
        """One row per slot: n, A, then per-stage X1..XR and D1..DR."""
        xs = [tr.x for tr in self.stages]
        ds = [tr.d for tr in self.stages]
        a = self.stages[0].a
        header = ["n", "A"] + [f"X{r+1}" for r in range(self.R)] + [f"D{r+1}" for r in range(self.R)]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for n in range(len(self)):
                row = [str(n), str(int(a[n]))]
                row += [str(int(x[n])) for x in xs]
                row += [str(int(d[n])) for d in ds]
                fh.write(",".join(row) + "\n")


def simulate_tandem(config: TandemConfig, n_slots: int,
                    stream: RandomStream | None = None,
                    seed: int | None = None) -> TandemTrace:
    """Simulate the tandem for ``n_slots`` slots, all stages starting empty.

    Stream discipline: the external arrival sequence is drawn first, then
    the stage service sequences in stage order, so a fixed seed pins the
    whole system.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    if stream is None:
        if seed is None:
            raise ValueError("pass a RandomStream or a seed")
        stream = RandomStream(seed)
        used_seed = seed
    else:
        used_seed = stream.seed
    a = sample_n(config.arrival, stream, n_slots)
    services = [sample_n(sv, stream, n_slots) for sv in config.services]
    out = TandemTrace(config=config, seed=used_seed)
    arr = a
    for r, s in enumerate(services):
        x_full = _lindley(arr, s, 0)
        tr = Trace(arrival=config.arrival if r == 0 else config.services[r - 1],
                   service=config.services[r], seed=used_seed, init_x=0,
                   a=arr, s=s, x_full=x_full)
        out.stages.append(tr)
        arr = tr.d
    return out


def _thin(v: np.ndarray, burn_in: int, stride: int) -> np.ndarray:
    return v[burn_in::stride]


def verify_product_form(trace: TandemTrace, burn_in: int = 10_000,
                        level: float = 0.01, stride: int = 9,
                        x_cutoff: int = 8) -> list[TestResult]:
    """Product-form checks on a stationary portion of a tandem trace.

    Runs (a) a marginal goodness-of-fit of each stage's queue length
    against its BerGeom stationary law, (b) pairwise cross-stage
    independence of the X's at a common slot, and (c) pairwise
    independence of the staggered Y's (Y1_n, Y2_{n-1}, ..., YR_{n-R+1}).
    Queue lengths along one trace are autocorrelated, so slots are thinned
    by ``stride`` before testing; queue-length cells are truncated at
    ``x_cutoff`` with pooled tails.
    """
    n = len(trace)
    if n - burn_in < 100_000:
        raise ValueError("trace too short: need at least 1e5 post-burn-in slots")
    laws: list[StationaryLaw] = [stationary_law(trace.config.stage_params(r))
                                 for r in range(trace.R)]
    results: list[TestResult] = []
    for r, tr in enumerate(trace.stages):
        xs = _thin(tr.x, burn_in, stride)
        emp = EmpiricalPmf.from_samples(xs, cutoff=max(x_cutoff, 2))
        results.append(chi_square_gof(emp, laws[r].x_pmf, level=level,
                                      name=f"stage{r+1}_x_marginal"))
    for r1 in range(trace.R):
        for r2 in range(r1 + 1, trace.R):
            x1 = _thin(trace.stages[r1].x, burn_in, stride)
            x2 = _thin(trace.stages[r2].x, burn_in, stride)
            results.append(independence_chi2(
                x1, x2, x_cutoff, x_cutoff, level=level, min_pairs=10_000,
                name=f"x_independence_stages_{r1+1}_{r2+1}"))
    # staggered Y's: component r uses slot n - r
    if trace.R > 1:
        y = [tr.y for tr in trace.stages]
        length = n - (trace.R - 1)
        for r1 in range(trace.R):
            for r2 in range(r1 + 1, trace.R):
                y1 = y[r1][trace.R - 1 - r1: trace.R - 1 - r1 + length]
                y2 = y[r2][trace.R - 1 - r2: trace.R - 1 - r2 + length]
                results.append(independence_chi2(
                    _thin(y1, burn_in, stride), _thin(y2, burn_in, stride),
                    x_cutoff, x_cutoff, level=level, min_pairs=10_000,
                    name=f"staggered_y_independence_{r1+1}_{r2+1}"))
    return results
