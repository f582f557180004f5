"""CSV inputs, the truth manifest, and machine-readable reports.

Inputs are plain CSV files:

* genotypes: a header row of SNP ids, then one row of 0/1/2 counts per individual;
* phenotype: a header and a single column of values;
* covariates: a header and one column per covariate.

Manifests and reports are JSON objects written with a fixed key order, so
two reports with equal contents are byte-identical. Non-finite floats are
written as ``null``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .data import FixedEffects, GenotypeMatrix, Phenotype
from .errors import DimensionMismatch, ValidationError

_DIGITS = np.frombuffer(b"012", dtype=np.uint8)


# ---------------------------------------------------------------- CSV inputs


def write_genotypes(path, W: GenotypeMatrix) -> None:
    n, N = W.n, W.N
    row = np.empty((n, 2 * N), dtype=np.uint8)
    row[:, 0::2] = W.values.astype(np.uint8) + ord("0")
    row[:, 1::2] = ord(",")
    row[:, -1] = ord("\n")
    with open(path, "wb") as fh:
        fh.write((",".join(W.snp_ids) + "\n").encode())
        fh.write(row.tobytes())


def _fast_genotypes(body: bytes, N: int):
    """Parse the common single-digit layout without Python-level loops; None if it does not fit."""
    width = 2 * N
    if len(body) % width:
        return None
    flat = np.frombuffer(body, dtype=np.uint8).reshape(-1, width)
    if not (np.all(flat[:, 1:-1:2] == ord(",")) and np.all(flat[:, -1] == ord("\n"))):
        return None
    digits = flat[:, 0::2]
    if not np.all(np.isin(digits, _DIGITS)):
        return None
    return (digits - ord("0")).astype(np.int8)


def read_genotypes(path) -> GenotypeMatrix:
    """Read a genotype CSV.

    Raises:
        ValidationError: a malformed row or an entry other than 0, 1, 2; the
            message gives the line and column.
    """
    path = Path(path)
    raw = path.read_bytes()
    head, sep, body = raw.partition(b"\n")
    ids = [s.strip() for s in head.decode().strip().split(",")]
    if not sep or not ids or ids == [""]:
        raise ValidationError(f"{path}: missing header row of SNP ids")
    values = _fast_genotypes(body, len(ids))
    if values is None:
        values = _slow_genotypes(path, raw.decode(), len(ids))
    if values.shape[0] < 2:
        raise ValidationError(f"{path}: need at least two individuals")
    return GenotypeMatrix(values, tuple(ids))


def _slow_genotypes(path, text, N):
    rows = []
    reader = csv.reader(text.splitlines()[1:])
    for line_no, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != N:
            raise ValidationError(f"{path}: line {line_no} has {len(cells)} fields, header has {N}")
        row = []
        for col, c in enumerate(cells, start=1):
            c = c.strip()
            if c not in ("0", "1", "2"):
                raise ValidationError(
                    f"{path}: line {line_no}, column {col}: entry {c!r} is not 0, 1 or 2"
                )
            row.append(int(c))
        rows.append(row)
    return np.asarray(rows, dtype=np.int8).reshape(len(rows), N)


def _read_numeric(path, what):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty {what} file") from None
        rows = []
        for line_no, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise ValidationError(
                    f"{path}: line {line_no} has {len(cells)} fields, header has {len(header)}"
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise ValidationError(f"{path}: line {line_no}: non-numeric {what} entry") from None
    return header, np.asarray(rows, dtype=float).reshape(len(rows), len(header))


def write_phenotype(path, Y: np.ndarray, name: str = "phenotype") -> None:
    with open(path, "w") as fh:
        fh.write(name + "\n")
        fh.writelines(f"{float(y)!r}\n" for y in Y)


def read_phenotype(path) -> Phenotype:
    header, values = _read_numeric(path, "phenotype")
    if len(header) != 1:
        raise ValidationError(f"{path}: phenotype file must have exactly one column")
    return Phenotype(values[:, 0])


def write_covariates(path, X: np.ndarray, names) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in np.atleast_2d(X):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_covariates(path) -> FixedEffects:
    header, values = _read_numeric(path, "covariate")
    return FixedEffects(values, tuple(header))


def check_rows(n_geno: int, geno_path, other_n: int, other_path) -> None:
    if n_geno != other_n:
        raise DimensionMismatch(f"{geno_path} has {n_geno} individuals but {other_path} has {other_n}")


# ------------------------------------------------------------------ JSON I/O


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating,)):
        return _clean(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    return x


def dumps(obj: dict) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj: dict) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None


def _nan(x):
    return float("nan") if x is None else x


class _Report:
    """Shared dict round-trip for the report dataclasses (fields in declaration order)."""

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict):
        names = [f.name for f in fields(cls)]
        unknown = set(d) - set(names)
        if unknown:
            raise ValidationError(f"unknown report keys: {sorted(unknown)}")
        return cls(**d)

    def emit(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str):
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        # compare through the serialized form so nan fields compare equal
        return type(self) is type(other) and self.emit() == other.emit()


@dataclass(eq=False)
class RunReport(_Report):
    config: dict
    mode: str
    eta_hat: float
    sigma2_hat: float
    se: float | None
    ci_low: float
    ci_high: float
    N_final: int
    selected: list = field(default_factory=list)  # [{"id", "column", "frequency"}]
    flags: list = field(default_factory=list)
    bootstrap_dropped: int = 0
    seed: int = 0
    recovery: dict | None = None
    timings: dict | None = None

    def __post_init__(self):
        self.se = _nan(self.se)


@dataclass(eq=False)
class DecisionReport(_Report):
    config: dict
    thresholds: list  # [{"threshold", "eta_hat", "ci_low", "ci_high", "N_final"}]
    overlap_count: float
    cutoff: float
    verdict: str
    flags: list
    chosen_threshold: float | None
    eta_hat: float
    sigma2_hat: float
    se: float | None
    ci_low: float
    ci_high: float
    N_final: int
    seed: int = 0
    timings: dict | None = None

    def __post_init__(self):
        self.se = _nan(self.se)


def write_calibration_table(path, cells) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eta", "q", "threshold", "mean_abs_error", "n_ok", "n_failed"])
        for c in cells:
            err = "" if not math.isfinite(c.mean_abs_error) else repr(c.mean_abs_error)
            w.writerow([repr(c.eta), repr(c.q), repr(c.threshold), err, c.n_ok, c.n_failed])
