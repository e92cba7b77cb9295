"""Acceptance gate: one line per criterion, tolerances from the config table."""

import json

import pytest

from adsdeform import cli
from adsdeform.config import RunConfig
from adsdeform.suites import SUITES

CFG = RunConfig()

CRITERIA = [
    (1, "group/decompositions", "group"),
    (2, "metric", "metric"),
    (3, "causal structure", "causal"),
    (4, "B-field", "bfield"),
    (5, "quantum torus", "torus"),
    (6, "symmetric space", "symsym"),
    (7, "star product", "star"),
    (8, "UDF/BHTZ", "udf"),
    (9, "spectral", "spectral"),
]


def _line(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")


@pytest.mark.parametrize("n,title,suite", CRITERIA, ids=[c[2] for c in CRITERIA])
def test_criterion(n, title, suite, capsys):
    checks = SUITES[suite](CFG)
    gating = [c for c in checks if c.gating]
    ok = all(c.passed for c in gating)
    detail = "; ".join(f"{c.name}={c.value:.3g}{'' if c.passed else ' (tol ' + format(c.tol, 'g') + ')'}"
                       for c in gating)
    _line(capsys, n, title, ok, detail)
    assert ok, detail


def test_criterion_10_reproducible(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        code = cli.main(["verify", "--suite", "all", "--out", str(path)])
        outs.append((code, path.read_bytes()))
    ok = outs[0] == outs[1]
    doc = json.loads(outs[0][1])
    ok = ok and doc["config_hash"] == CFG.hash()
    _line(capsys, 10, "reproducibility", ok, f"bit-identical={outs[0][1] == outs[1][1]}, exit={outs[0][0]}")
    assert ok
