import csv
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from metapool.types import OutcomeMeasure, validate_quantiles

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Gamma(shape=4, rate=2) percentiles at 5/25/50/75/95, from bisection on a
# quadrature of the gamma density (independent of scipy.special).
GAMMA_4_2_QUANTILES = (
    0.6831591983749157,
    1.2676601059500467,
    1.8360303744254485,
    2.554713742561691,
    3.8768282639663694,
)


def read_rows(name):
    with open(DATA / name, newline="") as fh:
        return list(csv.DictReader(fh))


def region10_quantiles():
    out = []
    for r in read_rows("region10_reference.csv"):
        q = validate_quantiles(
            [r[c] for c in ("q5", "q25", "q50", "q75", "q95")],
            OutcomeMeasure.from_tag(r["measure"]),
            r["model"],
            r["region"],
        )
        out.append((q, r))
    return out


def triple_to_quantiles(row):
    """Quantile surrogate from a printed ``mid (low, high)`` triple.

    Q25/Q75 are midpoints; they only matter for the skew gate, which the
    callers bypass by forcing the normal path.
    """
    mid, low, high = float(row["mid"]), float(row["low"]), float(row["high"])
    return validate_quantiles(
        [low, (low + mid) / 2, mid, (mid + high) / 2, high],
        OutcomeMeasure.from_tag(row["measure"]),
        row["model"],
        row["region"],
    )


@pytest.fixture
def region10_records():
    return region10_quantiles()


@pytest.fixture
def data_dir():
    return DATA


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[0]), s)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
