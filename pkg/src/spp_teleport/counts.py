"""Coincidence-count ingestion and count-derived statistics.

The bundled CSV carries the published coincidence counts for the CHSH
test and for the 24-cell teleportation-fidelity tables, each in a
with/without plasmon block. Schema: kind, block, setting, outcome, count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .tomo import monte_carlo_errors

CHSH_OUTCOMES = ("++", "+-", "-+", "--")
FIDELITY_OUTCOMES = ("phi", "perp")
BELL_LABELS = ("PsiPlus", "PsiMinus", "PhiMinus", "PhiPlus")
INPUT_LABELS = ("H", "V", "D", "A", "R", "L")

CLASSICAL_STATE_FIDELITY_BOUND = 2.0 / 3.0
CLASSICAL_PROCESS_FIDELITY_BOUND = 0.5


class CountsDataError(ValueError):
    """Malformed or incomplete count table."""


@dataclass(frozen=True)
class ChshSettings:
    theta1: float = 0.0
    theta1_prime: float = 45.0
    theta2: float = 22.5
    theta2_prime: float = 67.5

    def setting_labels(self) -> tuple[str, str, str, str]:
        def lbl(a, b):
            return f"{a:g}-{b:g}"

        return (
            lbl(self.theta1, self.theta2),
            lbl(self.theta1, self.theta2_prime),
            lbl(self.theta1_prime, self.theta2),
            lbl(self.theta1_prime, self.theta2_prime),
        )


@dataclass(frozen=True)
class CountsTable:
    kind: str  # "chsh" or "fidelity"
    block: str  # "with_spp" or "without_spp"
    rows: tuple = field(default_factory=tuple)  # (setting_label, {outcome: count})

    def __post_init__(self):
        expected = CHSH_OUTCOMES if self.kind == "chsh" else FIDELITY_OUTCOMES
        for label, counts in self.rows:
            missing = set(expected) - set(counts)
            if missing:
                raise CountsDataError(f"row {label!r} missing outcomes {sorted(missing)}")
            for out, c in counts.items():
                if c < 0:
                    raise CountsDataError(f"negative count in row {label!r}, outcome {out!r}")

    def row(self, label: str) -> dict:
        for lbl, counts in self.rows:
            if lbl == label:
                return counts
        raise CountsDataError(f"no row labeled {label!r}")


def load_counts_csv(path, kind: str, block: str) -> CountsTable:
    rows: dict[str, dict[str, int]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"kind", "block", "setting", "outcome", "count"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise CountsDataError(f"counts CSV must have columns {sorted(required)}")
        for i, row in enumerate(reader, start=2):
            if row["kind"] != kind or row["block"] != block:
                continue
            try:
                c = int(row["count"])
            except ValueError:
                raise CountsDataError(f"line {i}: count {row['count']!r} is not an integer") from None
            rows.setdefault(row["setting"], {})[row["outcome"]] = c
    if not rows:
        raise CountsDataError(f"no rows with kind={kind!r}, block={block!r} in {path}")
    return CountsTable(kind=kind, block=block, rows=tuple(rows.items()))


def bundled_counts_path():
    return resources.files("spp_teleport.data") / "coincidence_counts.csv"


def load_bundled(kind: str, block: str) -> CountsTable:
    return load_counts_csv(bundled_counts_path(), kind, block)


def correlation(counts: dict) -> float:
    """Correlation E = (N++ - N+- - N-+ + N--) / total for one setting."""
    try:
        npp, npm, nmp, nmm = (counts[o] for o in CHSH_OUTCOMES)
    except KeyError as exc:
        raise CountsDataError(f"missing outcome {exc}") from None
    total = npp + npm + nmp + nmm
    if total <= 0:
        raise CountsDataError("zero total counts")
    return (npp - npm - nmp + nmm) / total


def chsh_s(table: CountsTable, settings: ChshSettings = ChshSettings()) -> float:
    """|S| = |E(t1,t2) - E(t1,t2') + E(t1',t2) + E(t1',t2')|."""
    l_ab, l_abp, l_apb, l_apbp = settings.setting_labels()
    return abs(
        correlation(table.row(l_ab))
        - correlation(table.row(l_abp))
        + correlation(table.row(l_apb))
        + correlation(table.row(l_apbp))
    )


def fidelity_from_counts(n_phi: int, n_perp: int) -> float:
    """State fidelity as the fraction of counts in the target projection."""
    total = n_phi + n_perp
    if total <= 0:
        raise CountsDataError("zero total counts")
    if n_phi < 0 or n_perp < 0:
        raise CountsDataError("negative counts")
    return n_phi / total


@dataclass(frozen=True)
class FidelityTableResult:
    outcomes: tuple
    inputs: tuple
    fidelities: np.ndarray  # shape (4, 6)
    mean: float
    mean_std: float


def fidelity_table(table: CountsTable, mc_trials: int = 1000, seed: int = 0) -> FidelityTableResult:
    """Per-cell fidelities, unweighted mean, and Monte Carlo std of the mean."""
    fids = np.empty((len(BELL_LABELS), len(INPUT_LABELS)))
    raw = np.empty((len(BELL_LABELS), len(INPUT_LABELS), 2))
    for i, outcome in enumerate(BELL_LABELS):
        for j, inp in enumerate(INPUT_LABELS):
            row = table.row(f"{outcome}/{inp}")
            raw[i, j] = (row["phi"], row["perp"])
            fids[i, j] = fidelity_from_counts(row["phi"], row["perp"])

    def mean_stat(flat):
        c = flat.reshape(raw.shape)
        return float(np.mean(c[..., 0] / (c[..., 0] + c[..., 1])))

    _, std = monte_carlo_errors(raw.ravel(), mean_stat, trials=mc_trials, seed=seed)
    return FidelityTableResult(
        outcomes=BELL_LABELS,
        inputs=INPUT_LABELS,
        fidelities=fids,
        mean=float(fids.mean()),
        mean_std=std,
    )


def cell_fidelity_std(table: CountsTable, outcome: str, inp: str,
                      mc_trials: int = 1000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo (mean, std) of one cell's fidelity."""
    row = table.row(f"{outcome}/{inp}")
    counts = np.array([row["phi"], row["perp"]], dtype=float)
    return monte_carlo_errors(counts, lambda c: c[0] / (c[0] + c[1]), trials=mc_trials, seed=seed)


def sigma_violation(value: float, bound: float, std: float) -> float:
    """Number of standard deviations by which value exceeds the bound."""
    if std <= 0:
        raise CountsDataError("std must be positive")
    return (value - bound) / std
