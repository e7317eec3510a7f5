"""Runner artifacts, reproducibility, exit codes, dump-partition."""

import math
from pathlib import Path

import pytest

from qergo import load_config
from qergo.cli import main
from qergo.partition import dump_partition
from qergo.runner import FAILURE_MARKER, run_scenario

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def read_tree(root: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


def test_minimal_run_single_event(tmp_path):
    out = tmp_path / "o"
    written = run_scenario(CONFIG_DIR / "minimal.cfg", out_dir=out)
    assert [p.name for p in written] == ["00-single-window.csv", "manifest.txt"]
    text = (out / "00-single-window.csv").read_text()
    assert text == "window,label,lo,hi,eigenvalues\n0,0,0.0,1.0,1.0\n"


def test_rabi_trajectory_matches_closed_form(tmp_path):
    run_scenario(CONFIG_DIR / "rabi-born.cfg", out_dir=tmp_path)
    rows = (tmp_path / "00-rabi-windows.csv").read_text().splitlines()[1:]
    per_window = {}
    for row in rows:
        w, label, lo, hi, _ = row.split(",")
        key = (int(w), int(label))
        per_window[key] = per_window.get(key, 0.0) + (float(hi) - float(lo))
    for n in range(8):
        expected = math.cos(n / 2.0) ** 2
        assert per_window.get((n, 0), 0.0) == pytest.approx(expected, abs=1e-9)
        assert per_window.get((n, 1), 0.0) == pytest.approx(1 - expected, abs=1e-9)


def test_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario(CONFIG_DIR / "subtau.cfg", out_dir=a)
    run_scenario(CONFIG_DIR / "subtau.cfg", out_dir=b)
    assert read_tree(a) == read_tree(b)


def test_threads_do_not_change_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario(CONFIG_DIR / "rabi-born.cfg", out_dir=a, threads=1)
    run_scenario(CONFIG_DIR / "rabi-born.cfg", out_dir=b, threads=4)
    assert read_tree(a) == read_tree(b)


def test_manifest_records_hash_and_seeds(tmp_path):
    import hashlib

    run_scenario(CONFIG_DIR / "rabi-born.cfg", out_dir=tmp_path)
    manifest = (tmp_path / "manifest.txt").read_text()
    digest = hashlib.sha256((CONFIG_DIR / "rabi-born.cfg").read_bytes()).hexdigest()
    assert f"config_sha256 = {digest}" in manifest
    assert "seed=17" in manifest
    assert manifest.rstrip().endswith("status = ok")


def test_default_out_dir_is_relative_to_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(
        (CONFIG_DIR / "minimal.cfg").read_text().replace(
            "output_dir = out-minimal", "output_dir = results"
        )
    )
    written = run_scenario(cfg)
    assert written[0].parent == tmp_path / "results"


BROKEN_RUN = """
system {
  dimension = 2
  state = 1, 0
  hamiltonian {
    row = 0, 0
    row = 0, 0
  }
}
csco {
  id = sz
  basis {
    row = 1, 0
    row = 0, 1
  }
  labels = (0), (1)
  eigenvalues = (1), (-1)
}
experiment {
  kind = born-sampling
  windows = 1
  window = 5
  samples = 10
  seed = 1
}
"""


def test_failure_leaves_marker_and_no_artifacts(tmp_path):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text(BROKEN_RUN)
    out = tmp_path / "out"
    with pytest.raises(ValueError):
        run_scenario(cfg, out_dir=out)
    assert (out / FAILURE_MARKER).exists()
    assert "window 5" in (out / FAILURE_MARKER).read_text()
    assert [p.name for p in out.iterdir()] == [FAILURE_MARKER]


def test_success_clears_stale_marker(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    (out / FAILURE_MARKER).write_text("old failure\n")
    run_scenario(CONFIG_DIR / "minimal.cfg", out_dir=out)
    assert not (out / FAILURE_MARKER).exists()


def test_strict_float_passes_on_clean_scenario(tmp_path):
    written = run_scenario(
        CONFIG_DIR / "minimal.cfg", out_dir=tmp_path / "o", strict_float=True
    )
    assert written


# --- CLI surface ---


def test_cli_run_exit_zero(tmp_path, capsys):
    rc = main(["run", str(CONFIG_DIR / "minimal.cfg"), "--out-dir", str(tmp_path)])
    assert rc == 0
    assert "manifest.txt" in capsys.readouterr().out


def test_cli_parse_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("system {\n  notakey = 1\n}\n")
    rc = main(["run", str(bad)])
    assert rc == 2
    assert "line" in capsys.readouterr().err


def test_cli_invariant_error_exit_3(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text(BROKEN_RUN)
    rc = main(["run", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert rc == 3
    assert (tmp_path / "o" / FAILURE_MARKER).exists()


def test_cli_missing_file_exit_4(tmp_path, capsys):
    rc = main(["run", str(tmp_path / "absent.cfg")])
    assert rc == 4
    assert "i/o" in capsys.readouterr().err


def test_cli_dump_partition_matches_library(capsys):
    rc = main(
        ["dump-partition", str(CONFIG_DIR / "rabi-born.cfg"), "--window", "2", "--csco", "sz"]
    )
    assert rc == 0
    got = capsys.readouterr().out
    cfg = load_config(CONFIG_DIR / "rabi-born.cfg")
    part = cfg.scenario(windows=3).build_trajectory("sz").partitions[2]
    assert got == dump_partition(part)


def test_cli_dump_partition_unknown_csco_exit_2(capsys):
    rc = main(
        ["dump-partition", str(CONFIG_DIR / "minimal.cfg"), "--window", "0", "--csco", "qq"]
    )
    assert rc == 2
    assert "unknown csco" in capsys.readouterr().err


def test_cli_dump_partition_negative_window_exit_3(capsys):
    rc = main(
        ["dump-partition", str(CONFIG_DIR / "minimal.cfg"), "--window", "-1", "--csco", "sz"]
    )
    assert rc == 3


def test_cli_verify_passes(capsys):
    rc = main(["verify"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "ok" in out and "FAIL" not in out
    assert "worst=" in out
