"""Support-recovery metrics for a selected column set against known effects."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyTrueSupport


@dataclass(frozen=True)
class RecoveryReport:
    selected_size: int
    true_support_size: int
    capture_fraction: float
    decile_capture: tuple[float, ...]  # top-magnitude decile first; nan for an empty decile
    decile_sizes: tuple[int, ...]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["decile_capture"] = [None if np.isnan(x) else x for x in self.decile_capture]
        d["decile_sizes"] = list(self.decile_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RecoveryReport":
        return cls(
            selected_size=d["selected_size"],
            true_support_size=d["true_support_size"],
            capture_fraction=d["capture_fraction"],
            decile_capture=tuple(float("nan") if x is None else x for x in d["decile_capture"]),
            decile_sizes=tuple(d["decile_sizes"]),
        )


def recovery_metrics(selected, u_true: np.ndarray, n_groups: int = 10) -> RecoveryReport:
    """Share of the true support captured, overall and by effect-size decile.

    True effects are ranked by ``|u|`` descending (ties by index) and split into
    ``n_groups`` nearly equal consecutive groups.
    """
    u_true = np.asarray(u_true, dtype=float)
    support = np.flatnonzero(u_true)
    if support.size == 0:
        raise EmptyTrueSupport("the true effect vector has no non-zero entry")
    selected = np.unique(np.asarray(selected, dtype=np.intp))
    hit = np.isin(support, selected)
    order = np.lexsort((support, -np.abs(u_true[support])))
    groups = np.array_split(order, n_groups)
    capture = tuple(float(hit[g].mean()) if g.size else float("nan") for g in groups)
    return RecoveryReport(
        selected_size=int(selected.size),
        true_support_size=int(support.size),
        capture_fraction=float(hit.mean()),
        decile_capture=capture,
        decile_sizes=tuple(int(g.size) for g in groups),
    )
