"""Scenario-file parsing: grammar, diagnostics, strictness."""

from pathlib import Path

import numpy as np
import pytest

from qergo import ConfigError, parse_config_text
from qergo.config import (
    BornSamplingExperiment,
    SequentialExperiment,
    TrajectoryExperiment,
    load_config,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


MINIMAL = """
system {
  dimension = 2
  state = 1, 0
  hamiltonian {
    row = 0, 0.5
    row = 0.5, 0
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
  kind = trajectory
  windows = 3
}
"""


def test_minimal_text_parses():
    cfg = parse_config_text(MINIMAL)
    assert cfg.state0.amplitudes.shape == (2,)
    assert len(cfg.csets) == 1 and cfg.csets[0].id == "sz"
    assert cfg.schedulers["sz"].kind == "contiguous"  # default when omitted
    (exp,) = cfg.experiments
    assert isinstance(exp, TrajectoryExperiment)
    assert exp.windows == 3
    assert exp.name == "trajectory-0"  # default id is kind-ordinal
    assert cfg.output_dir == "out"


def test_scenario_construction_runs():
    cfg = parse_config_text(MINIMAL)
    traj = cfg.scenario(windows=2).build_trajectory("sz")
    assert traj.windows_covered == 2


def test_sha256_matches_text():
    import hashlib

    cfg = parse_config_text(MINIMAL)
    assert cfg.sha256 == hashlib.sha256(MINIMAL.encode()).hexdigest()


@pytest.mark.parametrize(
    "literal,expected",
    [
        ("3", 3 + 0j),
        ("-2.5", -2.5 + 0j),
        ("1+2i", 1 + 2j),
        ("1-2i", 1 - 2j),
        ("0.5i", 0.5j),
        ("-0.5i", -0.5j),
        ("1e-3+2e-4i", 1e-3 + 2e-4j),
        (".5", 0.5 + 0j),
    ],
)
def test_complex_literals(literal, expected):
    text = MINIMAL.replace("state = 1, 0", f"state = {literal}, 0", 1)
    cfg = parse_config_text(text)
    amp = complex(cfg.state0.amplitudes[0]) * abs(expected)  # undo normalization
    assert amp == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("bad", ["1+", "i", "2j", "1 + 2i", "--3", "1+2i+3i"])
def test_bad_complex_literals_rejected(bad):
    text = MINIMAL.replace("state = 1, 0", f"state = {bad}, 0", 1)
    with pytest.raises(ConfigError, match="line"):
        parse_config_text(text)


def test_unknown_key_rejected_with_line_number():
    text = MINIMAL.replace("  dimension = 2", "  dimension = 2\n  typo_key = 5", 1)
    with pytest.raises(ConfigError, match=r"line 4.*typo_key"):
        parse_config_text(text)


def test_unknown_block_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        parse_config_text(MINIMAL + "\nmystery {\n}\n")


def test_unmatched_close_rejected():
    with pytest.raises(ConfigError, match="unmatched"):
        parse_config_text("}\n")


def test_unclosed_block_rejected():
    with pytest.raises(ConfigError, match="unclosed"):
        parse_config_text("system {\n  dimension = 2\n")


def test_garbage_line_rejected():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("what is this\n")


def test_duplicate_key_rejected():
    text = MINIMAL.replace("  dimension = 2", "  dimension = 2\n  dimension = 2", 1)
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config_text(text)


def test_missing_required_key_rejected():
    with pytest.raises(ConfigError, match="missing key 'dimension'"):
        parse_config_text(MINIMAL.replace("  dimension = 2\n", ""))


def test_row_count_mismatch_rejected():
    with pytest.raises(ConfigError, match="2 'row' entries"):
        parse_config_text(MINIMAL.replace("    row = 0, 0.5\n", "", 1))


def test_row_width_mismatch_rejected():
    with pytest.raises(ConfigError, match="expected 2"):
        parse_config_text(MINIMAL.replace("row = 0, 0.5", "row = 0, 0.5, 1", 1))


def test_state_length_mismatch_rejected():
    with pytest.raises(ConfigError, match="amplitudes"):
        parse_config_text(MINIMAL.replace("state = 1, 0", "state = 1, 0, 0", 1))


def test_zero_state_rejected():
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL.replace("state = 1, 0", "state = 0, 0", 1))


def test_non_hermitian_hamiltonian_rejected():
    text = MINIMAL.replace("row = 0, 0.5", "row = 0, 1i", 1)
    with pytest.raises(ConfigError, match="[Hh]ermitian"):
        parse_config_text(text)


def test_non_unitary_basis_rejected():
    text = MINIMAL.replace("row = 1, 0\n    row = 0, 1", "row = 1, 1\n    row = 0, 1")
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_multi_index_labels():
    text = MINIMAL.replace("labels = (0), (1)", "labels = (0,1), (1,0)")
    text = text.replace("eigenvalues = (1), (-1)", "eigenvalues = (1.5, 2), (-1.5, -2)")
    cfg = parse_config_text(text)
    assert cfg.csets[0].labels == ((0, 1), (1, 0))
    assert cfg.csets[0].eigenvalues == ((1.5, 2.0), (-1.5, -2.0))


@pytest.mark.parametrize("bad", ["0, 1", "(0), 1", "()", "(0) (1) junk"])
def test_malformed_tuples_rejected(bad):
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL.replace("labels = (0), (1)", f"labels = {bad}"))


def test_unknown_scheduler_kind_rejected():
    text = MINIMAL.replace(
        "  labels = (0), (1)",
        "  labels = (0), (1)\n  scheduler {\n    kind = banana\n  }",
    )
    with pytest.raises(ConfigError, match="banana"):
        parse_config_text(text)


def test_scheduler_settings_applied():
    text = MINIMAL.replace(
        "  labels = (0), (1)",
        "  labels = (0), (1)\n  scheduler {\n    kind = seeded-random\n"
        "    max_subintervals = 3\n    seed = 9\n  }",
    )
    spec = parse_config_text(text).schedulers["sz"]
    assert (spec.kind, spec.max_subintervals, spec.seed) == ("seeded-random", 3, 9)


def test_unknown_experiment_kind_rejected():
    with pytest.raises(ConfigError, match="unknown experiment kind"):
        parse_config_text(MINIMAL.replace("kind = trajectory", "kind = teleport"))


def test_experiment_unknown_csco_rejected():
    text = MINIMAL.replace("kind = trajectory", "kind = trajectory\n  csco = nope")
    with pytest.raises(ConfigError, match="unknown csco id 'nope'"):
        parse_config_text(text)


def test_duplicate_csco_id_rejected():
    block = MINIMAL[MINIMAL.index("csco {") : MINIMAL.index("experiment {")]
    with pytest.raises(ConfigError, match="duplicate csco id"):
        parse_config_text(MINIMAL.replace("experiment {", block + "experiment {", 1))


def test_duplicate_experiment_ids_rejected():
    extra = "\nexperiment {\n  kind = trajectory\n  id = same\n  windows = 1\n}\n"
    with pytest.raises(ConfigError, match="unique"):
        parse_config_text(MINIMAL.replace("kind = trajectory", "kind = trajectory\n  id = same") + extra)


def test_sequential_step_parsing():
    text = MINIMAL.replace(
        "experiment {\n  kind = trajectory\n  windows = 3\n}",
        "experiment {\n  kind = sequential-measurement\n  runs = 10\n  seed = 1\n"
        "  step = sz, 0.5\n  step = sz, 1.5\n}",
    )
    (exp,) = parse_config_text(text).experiments
    assert isinstance(exp, SequentialExperiment)
    assert exp.steps == (("sz", 0.5), ("sz", 1.5))


def test_sequential_bad_step_rejected():
    text = MINIMAL.replace(
        "kind = trajectory\n  windows = 3",
        "kind = sequential-measurement\n  runs = 10\n  seed = 1\n  step = sz",
    )
    with pytest.raises(ConfigError, match="step"):
        parse_config_text(text)


def test_born_sampling_defaults():
    text = MINIMAL.replace(
        "kind = trajectory\n  windows = 3",
        "kind = born-sampling\n  windows = 2\n  samples = 50\n  seed = 4",
    )
    (exp,) = parse_config_text(text).experiments
    assert isinstance(exp, BornSamplingExperiment)
    assert exp.window == 0 and exp.samples == 50


def test_comments_and_blank_lines_ignored():
    text = "# leading comment\n\n" + MINIMAL.replace(
        "dimension = 2", "dimension = 2  # trailing comment"
    )
    assert parse_config_text(text).state0.amplitudes.shape == (2,)


def test_bundled_configs_parse():
    paths = sorted(CONFIG_DIR.glob("*.cfg"))
    assert len(paths) >= 5
    for p in paths:
        cfg = load_config(p)
        assert cfg.experiments, p.name
        assert cfg.base_dir == CONFIG_DIR


def test_load_config_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "nope.cfg")


def test_basis_columns_are_eigenvectors():
    text = MINIMAL.replace(
        "row = 1, 0\n    row = 0, 1",
        "row = 0.7071067811865476, 0.7071067811865476\n"
        "    row = 0.7071067811865476, -0.7071067811865476",
    )
    cs = parse_config_text(text).csets[0]
    v = cs.basis_vector(1)
    assert np.allclose(v, np.array([1.0, -1.0]) / np.sqrt(2.0))
