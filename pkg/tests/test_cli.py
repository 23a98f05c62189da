# ---------------------------------------------------------------------
#   Tests for the command-line front end
# ---------------------------------------------------------------------

import argparse
import json
from fractions import Fraction
from pathlib import Path

import pandas as pd
import pytest

from alphamatch import CFString
from alphamatch.cli import (
    EXIT_OK,
    EXIT_USAGE,
    RunConfig,
    build_parser,
    main,
    parse_alpha,
    parse_string,
    parse_window,
)

# -------------------------------------------------------------------------------------
#   Flag parsers
# -------------------------------------------------------------------------------------


def test_parse_window() -> None:
    assert parse_window("0.3,0.4") == (0.3, 0.4)


@pytest.mark.parametrize("text", ["0.3", "0.3,0.4,0.5", "a,b"])
def test_parse_window_rejects(text: str) -> None:
    with pytest.raises(argparse.ArgumentTypeError, match="expected"):
        parse_window(text)


def test_parse_alpha_is_exact() -> None:
    assert parse_alpha("0.338") == Fraction(169, 500)
    assert parse_alpha("41/100") == Fraction(41, 100)
    with pytest.raises(argparse.ArgumentTypeError, match="rational"):
        parse_alpha("golden")


def test_parse_string() -> None:
    assert parse_string("2,1,1") == CFString.of(2, 1, 1)
    with pytest.raises(argparse.ArgumentTypeError):
        parse_string("2,0")


# -------------------------------------------------------------------------------------
#   Run configuration
# -------------------------------------------------------------------------------------


def test_manifest_carries_exact_alpha(tmp_path: Path) -> None:
    ns = build_parser().parse_args(
        ["density", "--alpha", "41/100", "--out", str(tmp_path / "d.csv")],
    )
    cfg = RunConfig.from_namespace(ns)
    assert cfg.alpha == Fraction(41, 100)
    assert cfg.manifest.startswith("# alphamatch density ")
    assert "alpha=0.41" in cfg.manifest
    assert cfg.manifest.endswith("alpha_exact=41/100")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["-v", "-q", "tree"],
        ["tree", "--depth", "41"],
        ["tree", "--depth", "x"],
        ["tree", "--window", "0.5"],
        ["entropy", "--window", "0.3,0.4", "--samples", "0"],
        ["density"],
        ["density", "--alpha", "golden"],
        ["chain", "--start", "1,1"],
        ["tree", "--out", "/nonexistent/dir/out.csv"],
    ],
)
def test_usage_errors(argv: list[str]) -> None:
    assert main(argv) == EXIT_USAGE


# -------------------------------------------------------------------------------------
#   Commands
# -------------------------------------------------------------------------------------


def test_tree_writes_csv_tables(tmp_path: Path) -> None:
    out = tmp_path / "tree.csv"
    assert main(["-q", "tree", "--depth", "1", "--out", str(out)]) == EXIT_OK
    first = out.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("# alphamatch tree depth=1 seed=0 threads=1")
    intervals = pd.read_csv(out, comment="#")
    assert list(intervals[["k1", "k2"]].itertuples(index=False, name=None)) == [
        (2, 2),
        (2, 1),
    ]
    assert (tmp_path / "tree_gaps.csv").exists()
    assert (tmp_path / "tree_sizes.csv").exists()


def test_tree_writes_coverage_table(tmp_path: Path) -> None:
    out = tmp_path / "tree.csv"
    assert main(["-q", "tree", "--depth", "1", "--out", str(out)]) == EXIT_OK
    table = pd.read_csv(tmp_path / "tree_coverage.csv", comment="#")
    row = table.iloc[0]
    # (sqrt2 - 1, 1] is covered at depth 1
    assert row["lower"] <= float(row["value"]) <= row["upper"]
    assert float(row["value"]) == pytest.approx(2 - 2**0.5, abs=1e-9)
    assert row["intervals"] == 2


def test_tree_json_carries_coverage(tmp_path: Path) -> None:
    out = tmp_path / "tree.json"
    argv = ["-q", "tree", "--depth", "0", "--format", "json", "--out", str(out)]
    assert main(argv) == EXIT_OK
    payload = json.loads((tmp_path / "tree_coverage.json").read_text(encoding="utf-8"))
    assert payload["table"] == "coverage"
    assert float(payload["rows"][0]["value"]) == pytest.approx(
        (3 - 5**0.5) / 2,
        abs=1e-9,
    )


def test_unwritable_output_is_a_usage_error(tmp_path: Path) -> None:
    # the output path names an existing directory
    assert main(["-q", "tree", "--depth", "0", "--out", str(tmp_path)]) == EXIT_USAGE


def test_tree_writes_json(tmp_path: Path) -> None:
    out = tmp_path / "tree.json"
    argv = ["-q", "tree", "--depth", "0", "--format", "json", "--out", str(out)]
    assert main(argv) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["manifest"].startswith("# alphamatch tree depth=0")
    assert payload["table"] == "intervals"
    assert [row["k1"] for row in payload["rows"]] == [2]
    gaps = json.loads((tmp_path / "tree_gaps.json").read_text(encoding="utf-8"))
    assert gaps["rows"][0]["label_hi"] == "1"


def test_tree_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["-q", "tree", "--depth", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("# alphamatch tree") == 4


def test_chain_command(tmp_path: Path) -> None:
    out = tmp_path / "chain.csv"
    argv = ["-q", "chain", "--levels", "2", "--verify", "spot", "--out", str(out)]
    assert main(argv) == EXIT_OK
    chain = pd.read_csv(out, comment="#", dtype={"label_lo": str, "label_hi": str})
    assert chain["level"].tolist() == [1, 2]
    assert chain["label_lo"].tolist() == ["2", "2,1,1"]
    cluster = pd.read_csv(tmp_path / "chain_cluster.csv", comment="#", dtype=str)
    assert cluster["prefix"][0] == "2,1,1"


def test_entropy_command(tmp_path: Path) -> None:
    out = tmp_path / "entropy.csv"
    argv = [
        "-q",
        "entropy",
        "--window",
        "0.3,0.4",
        "--grid",
        "2",
        "--iters",
        "20",
        "--samples",
        "5",
        "--out",
        str(out),
    ]
    assert main(argv) == EXIT_OK
    table = pd.read_csv(out, comment="#")
    assert table["alpha"].tolist() == pytest.approx([0.3, 0.4])
    assert (table["N"] == 20).all()


def test_scan_command(tmp_path: Path) -> None:
    out = tmp_path / "scan.csv"
    argv = [
        "-q",
        "scan",
        "--window",
        "0.40,0.43",
        "--seeds",
        "12",
        "--kmax",
        "20",
        "--seed",
        "3",
        "--out",
        str(out),
    ]
    assert main(argv) == EXIT_OK
    table = pd.read_csv(out, comment="#")
    assert list(table[["k1", "k2"]].itertuples(index=False, name=None)) == [
        (3, 3),
        (2, 2),
    ]
