"""Published benchmark risk values used as reproduction targets.

The same numbers are committed as a CSV fixture (data/published_values.csv);
a test cross-checks the two transcriptions against each other.
"""
from __future__ import annotations

import csv
from importlib import resources

# Mean Hellinger risk per (level ell, example), n = 1000, L = 0.03.
FIGURE2_RISK: dict[tuple[int, int], float] = {}
_FIG2_ROWS = {
    1: (0.031, 0.046, 0.299, 0.181, 0.089, 0.291, 0.358),
    2: (0.011, 0.015, 0.087, 0.107, 0.024, 0.170, 0.241),
    3: (0.011, 0.014, 0.026, 0.058, 0.013, 0.067, 0.156),
    4: (0.011, 0.018, 0.026, 0.035, 0.015, 0.046, 0.113),
    5: (0.011, 0.018, 0.022, 0.038, 0.015, 0.048, 0.098),
    6: (0.011, 0.018, 0.022, 0.038, 0.015, 0.048, 0.065),
    7: (0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.044),
    8: (0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.040),
    9: (0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.040),
    10: (0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.040),
}
for _ell, _row in _FIG2_ROWS.items():
    for _ex, _v in enumerate(_row, start=1):
        FIGURE2_RISK[(_ell, _ex)] = _v

# Mean risks and oracle-ratio quantiles per example; n = 1000, ell = 7,
# 250 replicates.
FIGURE4: dict[str, dict[int, float]] = {
    "mean_h2": {1: 0.011, 2: 0.017, 3: 0.022, 4: 0.038, 5: 0.018, 6: 0.052,
                7: 0.049},
    "mean_oracle_h2": {1: 0.007, 2: 0.011, 3: 0.015, 4: 0.028, 5: 0.012,
                       6: 0.037, 7: 0.041},
    "ratio_q50": {1: 1.473, 2: 1.513, 3: 1.443, 4: 1.369, 5: 1.422, 6: 1.420,
                  7: 1.200},
    "ratio_q75": {1: 1.698, 2: 1.627, 3: 1.557, 4: 1.440, 5: 1.575, 6: 1.481,
                  7: 1.244},
    "ratio_q90": {1: 1.921, 2: 1.834, 3: 1.683, 4: 1.509, 5: 1.749, 6: 1.543,
                  7: 1.290},
    "ratio_q95": {1: 2.113, 2: 1.965, 3: 1.770, 4: 1.558, 5: 1.839, 6: 1.590,
                  7: 1.317},
}

# Mean empirical quadratic risk per example; same run settings as FIGURE4.
FIGURE5_L2: dict[int, float] = {1: 0.064, 2: 0.108, 3: 0.229, 4: 0.319,
                                5: 0.116, 6: 0.528, 7: 2.82}


def load_fixture() -> dict[tuple[str, str, int], float]:
    """The committed CSV fixture as {(figure, label, example): value}."""
    out: dict[tuple[str, str, int], float] = {}
    path = resources.files("mctd").joinpath("data/published_values.csv")
    with path.open() as fh:
        for rec in csv.DictReader(fh):
            key = (rec["figure"], rec["label"], int(rec["example"]))
            out[key] = float(rec["value"])
    return out


def as_fixture_dict() -> dict[tuple[str, str, int], float]:
    """The module constants flattened to the fixture-CSV key scheme."""
    out: dict[tuple[str, str, int], float] = {}
    for (ell, ex), v in FIGURE2_RISK.items():
        out[("figure2", f"ell={ell}", ex)] = v
    for label, per_ex in FIGURE4.items():
        for ex, v in per_ex.items():
            out[("figure4", label, ex)] = v
    for ex, v in FIGURE5_L2.items():
        out[("figure5", "mean_l2", ex)] = v
    return out
