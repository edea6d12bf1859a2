"""Acceptance gate: every criterion at its stated tolerance.

The suite is executed once through the CLI ``check`` subcommand (which
prints one pass/fail line per criterion) and the per-criterion results are
asserted individually below.
"""

import numpy as np
import pytest

from dtnlab.acceptance import ACCEPTANCE_NAMES, run_acceptance
from dtnlab.cli import main


@pytest.fixture(scope="module")
def results(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    res = run_acceptance(out_dir=out, seed=42, echo=print)
    return {r.index: r for r in res}


@pytest.mark.parametrize("index", range(1, 12), ids=[f"{i:02d}_{n}" for i, n in enumerate(ACCEPTANCE_NAMES, 1)])
def test_criterion(results, index):
    res = results[index]
    assert res.passed, res.line()


def test_check_subcommand_exits_zero(results, tmp_path):
    # criteria already verified above; the check subcommand must agree and
    # exit 0 (it reruns the full suite end to end)
    if not all(r.passed for r in results.values()):
        pytest.skip("criteria failing; exit-code contract checked via results")
    rc = main(["check", "--out", str(tmp_path), "--seed", "42"])
    assert rc == 0
    assert (tmp_path / "acceptance.csv").exists()
