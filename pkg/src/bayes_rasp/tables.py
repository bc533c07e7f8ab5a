"""Published optimal-design tables used by ``bayes-rasp reproduce``.

Each row records the parameter override applied to the base scenario and the
reported optimum: design, utility, action probabilities, E[D], E[eta], L_w.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TableRow:
    overrides: dict
    design: tuple[int, int, float]
    psi: float
    probs: tuple[float, float, float]
    e_d: float
    e_eta: float
    l_w: float


@dataclass(frozen=True)
class Table:
    key: str
    title: str
    scenario: str
    engine: str
    rows: list[TableRow] = field(default_factory=list)


def _row(ov, design, psi, probs, e_d, e_eta, l_w):
    return TableRow(ov, design, psi, probs, e_d, e_eta, l_w)


TABLES: dict[str, Table] = {
    "1": Table("1", "Optimal design, exponential model", "example1", "exact", [
        _row({}, (5, 2, 5.75), 70.81, (0.18, 0.24, 0.58), 1.40, 3.95, 0.09),
    ]),
    "2": Table("2", "Optimal design versus a3", "example1", "exact", [
        _row({"a3": 8}, (5, 2, 10.63), 57.69, (0.10, 0.13, 0.77), 1.69, 5.46, 0.02),
        _row({"a3": 9}, (5, 2, 5.75), 70.81, (0.18, 0.24, 0.58), 1.40, 3.95, 0.09),
        _row({"a3": 10}, (4, 2, 4.03), 81.30, (0.32, 0.32, 0.36), 1.05, 3.35, 0.19),
        _row({"a3": 11}, (1, 1, 1.71), 89.38, (0.0, 0.85, 0.15), 0.15, 1.57, 0.50),
        _row({"a3": 12}, (0, 0, 0.0), 92.03, (0.0, 1.0, 0.0), 0.0, 0.0, 0.92),
    ]),
    "3": Table("3", "Optimal design versus b1", "example1", "exact", [
        _row({"b1": 3}, (5, 1, 3.30), 29.31, (0.0, 0.31, 0.69), 0.52, 3.12, 0.21),
        _row({"b1": 5}, (2, 1, 6.55), 38.59, (0.0, 0.37, 0.63), 0.63, 3.99, 0.11),
        _row({"b1": 10}, (5, 2, 5.75), 70.81, (0.18, 0.24, 0.58), 1.40, 3.95, 0.09),
        _row({"b1": 15}, (8, 5, 10.21), 106.85, (0.34, 0.13, 0.53), 3.75, 7.89, 0.07),
        _row({"b1": 20}, (10, 7, 11.76), 144.26, (0.36, 0.14, 0.50), 5.28, 9.47, 0.07),
    ]),
    "4": Table("4", "Optimal design versus b3", "example1", "exact", [
        _row({"b3": 15}, (8, 4, 7.46), 65.22, (0.32, 0.14, 0.54), 2.94, 5.65, 0.07),
        _row({"b3": 35}, (5, 2, 5.75), 76.62, (0.18, 0.24, 0.58), 1.40, 3.95, 0.09),
        _row({"b3": 55}, (4, 2, 7.67), 88.37, (0.17, 0.24, 0.69), 1.42, 5.21, 0.09),
        _row({"b3": 110}, (2, 1, 11.50), 123.10, (0.23, 0.0, 0.77), 0.77, 5.43, 0.0),
    ]),
    "5": Table("5", "Optimal design versus the manufacturer prior (alpha2, beta2)", "example1", "exact", [
        _row({"alpha2": 2.8, "beta2": 18}, (2, 1, 6.55), 33.21, (0.0, 0.22, 0.78), 0.78, 3.13, 0.14),
        _row({"alpha2": 2.8, "beta2": 28}, (5, 2, 5.75), 48.42, (0.14, 0.24, 0.62), 1.48, 3.88, 0.11),
        _row({"alpha2": 1.8, "beta2": 28}, (8, 5, 10.13), 112.96, (0.51, 0.15, 0.34), 3.10, 8.93, 0.06),
        _row({"alpha2": 18, "beta2": 180}, (2, 1, 6.55), 30.40, (0.0, 0.28, 0.72), 0.72, 3.69, 0.20),
    ]),
    "6": Table("6", "Optimal design versus b6", "example1", "exact", [
        _row({"b6": 0}, (5, 5, 33.29), 76.41, (0.33, 0.13, 0.54), 4.24, 23.06, 0.06),
        _row({"b6": 0.1}, (6, 5, 17.37), 74.36, (0.33, 0.13, 0.54), 3.91, 13.18, 0.07),
        _row({"b6": 1}, (6, 2, 4.60), 68.95, (0.19, 0.24, 0.57), 1.39, 3.19, 0.09),
        _row({"b6": 3}, (8, 2, 3.29), 63.67, (0.20, 0.23, 0.57), 1.37, 2.30, 0.09),
    ]),
    "7": Table("7", "Random-consumer plan", "example2_rdsp", "rdsp", [
        _row({}, (3, 3, 4.73), 85.08, (0.50, 0.37, 0.13), 1.03, 4.59, 1.14),
    ]),
    "8": Table("8", "Random-consumer plan versus b1", "example2_rdsp", "rdsp", [
        _row({"b1": 5}, (2, 1, 5.45), 39.37, (0.46, 0.27, 0.27), 0.57, 3.56, 0.83),
        _row({"b1": 10}, (3, 3, 4.73), 85.08, (0.50, 0.37, 0.13), 1.03, 4.59, 1.14),
        _row({"b1": 15}, (5, 4, 4.93), 132.38, (0.68, 0.23, 0.09), 1.62, 4.40, 0.70),
        _row({"b1": 20}, (5, 5, 4.94), 180.13, (0.69, 0.22, 0.09), 1.74, 4.90, 0.68),
    ]),
    "app": Table("app", "Weibull application plan", "application", "mc", [
        _row({}, (10, 5, 0.481), float("nan"), (0.35, 0.24, 0.41), float("nan"), float("nan"), float("nan")),
    ]),
}

# Decisions on five observed samples under the application plan (10, 5, 0.481):
# failure times, e1, e2, decision.
APPLICATION_DECISIONS = [
    ((0.243, 0.354, 0.457), -512.83, -787.44, "AcceptNoWarranty"),
    ((0.020, 0.155, 0.272, 0.423), 645.61, 107.01, "Reject"),
    ((0.150, 0.220, 0.250, 0.465), 42.01, -356.93, "AcceptWithWarranty"),
    ((0.103, 0.151, 0.230, 0.405, 0.420), 441.06, -45.22, "AcceptWithWarranty"),
    ((0.038,), -173.01, -534.39, "AcceptNoWarranty"),
]
