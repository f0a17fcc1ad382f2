"""Flow histories, monitor vectors and their CSV form."""

import csv
import hashlib
from dataclasses import dataclass, field, fields

import numpy as np

CSV_COLUMNS = (
    "t",
    "r_or_profile_hash",
    "H_min",
    "H_max",
    "ratio",
    "lambda_min",
    "psi_delta_max",
    "grad_H_sq_max",
    "area",
    "int_H2",
)


@dataclass(frozen=True)
class MonitorVector:
    H_min: float
    H_max: float
    lambda_min: float
    lambda_max: float
    psi_delta_max: float
    grad_H_sq_max: float
    volume: float
    int_H2: float
    # max over nodes of |grad H|^2 - b H^4
    gradient_excess_max: float
    # max over nodes of lambda_max(x) / lambda_min(x)
    pointwise_ratio_max: float

    def __post_init__(self):
        if self.H_min > self.H_max or self.lambda_min > self.lambda_max:
            raise ValueError("monitor extrema are out of order")

    @property
    def ratio(self):
        return self.H_max / self.H_min if self.H_min > 0 else float("inf")


@dataclass(frozen=True)
class ConvexityCertificate:
    """Largest ``epsilon`` with ``A >= epsilon H id``.

    ``L_bound`` is the O'Neill-tensor constant of the base; it vanishes for
    SU(2) with the bi-invariant metric.
    """

    epsilon: float
    L_bound: float = 0.0


def profile_hash(r):
    return hashlib.blake2b(np.ascontiguousarray(r).tobytes(), digest_size=6).hexdigest()


def extinction_time(t, q, dt=None):
    """Extrapolate the zero of ``q(t)`` from the last three samples.

    ``q`` should vanish linearly at extinction (``r^2`` or area).  Offsets
    between samples are rebuilt from the step sizes ``dt`` when given, since
    the final steps can fall below the resolution of ``t`` itself.
    """
    t = np.asarray(t, dtype=float)[-3:]
    q = np.asarray(q, dtype=float)[-3:]
    if t.size < 2:
        return float(t[-1])
    if dt is None:
        s = t - t[-1]
    else:
        tail = np.asarray(dt, dtype=float)[-(t.size - 1):]
        s = -np.concatenate([np.cumsum(tail[::-1])[::-1], [0.0]])
    if t.size == 3 and np.ptp(s) > 0:
        c2, c1, c0 = np.polyfit(s, q, 2)
        roots = np.roots([c2, c1, c0]) if c2 != 0 else np.roots([c1, c0])
        roots = roots[np.isreal(roots)].real
        roots = roots[roots >= -1e-15]
        if roots.size:
            return float(t[-1] + roots.min())
    slope = (q[-1] - q[-2]) / (s[-1] - s[-2])
    return float(t[-1] - q[-1] / slope)


@dataclass
class FlowTrajectory:
    mode: str
    kappa: float
    columns: dict
    extinct: bool
    extinction_time: float | None = None
    snapshots: list = field(default_factory=list)
    psi: np.ndarray | None = None
    labels: list | None = None

    def __len__(self):
        return len(self.columns["t"])

    @property
    def t(self):
        return self.columns["t"]

    def __getitem__(self, name):
        return self.columns[name]

    def monitor(self, k):
        c = self.columns
        names = [f.name for f in fields(MonitorVector)]
        values = {n: float(c["area" if n == "volume" else n][k]) for n in names}
        return MonitorVector(**values)

    def label(self, k):
        if self.labels is not None:
            return self.labels[k]
        return format(float(self.columns["r"][k]), ".17g")

    def to_csv(self, path):
        c = self.columns
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for k in range(len(self)):
                row = [format(float(c["t"][k]), ".17g"), self.label(k)]
                row += [format(float(c[name][k]), ".17g") for name in CSV_COLUMNS[2:]]
                writer.writerow(row)

    def snapshots_to_csv(self, path):
        """Profile dumps as long-format rows ``(t, psi, r)``."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("t", "psi", "r"))
            for t, r in self.snapshots:
                for p, x in zip(self.psi, r):
                    writer.writerow((format(float(t), ".17g"), format(float(p), ".17g"), format(float(x), ".17g")))
