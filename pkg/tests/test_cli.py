import json
import logging

import pytest

from hubwalk.cli import main

TINY_SGNS = {"window": 3, "negatives_per_pair": 2, "epochs": 2}


def write_config(tmp_path, name="config.json", **payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_stats_defaults_to_bundled_dataset(capsys):
    assert main(["stats"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "nodes edges components avg_deg std_deg max_deg labels"
    assert out[1] == "34 78 1 4.59 3.88 17 2"


def test_stats_without_labels_warns_and_drops_column(tmp_path, capsys, caplog):
    edges = tmp_path / "toy.edges"
    edges.write_text("a b\nb c\n")
    with caplog.at_level(logging.WARNING, logger="hubwalk.cli"):
        assert main(["stats", "--edges", str(edges)]) == 0
    assert any("no labels" in r.getMessage() for r in caplog.records)
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == [
        "nodes", "edges", "components", "avg_deg", "std_deg", "max_deg"
    ]
    assert out[1].split()[0] == "3"


def test_stats_missing_file_fails(tmp_path, capsys):
    assert main(["stats", "--edges", str(tmp_path / "nope.edges")]) == 1


def synth_args(tmp_path, sub="out"):
    return [
        "synth", "--nodes", "40", "--classes", "2", "--p-in", "0.3",
        "--p-out", "0.05", "--hub-fraction", "0.1", "--seed", "3",
        "--out-dir", str(tmp_path / sub),
    ]


def test_synth_writes_deterministic_instance(tmp_path, capsys):
    assert main(synth_args(tmp_path, "one")) == 0
    assert main(synth_args(tmp_path, "two")) == 0
    one_e = (tmp_path / "one" / "planted.edges").read_bytes()
    two_e = (tmp_path / "two" / "planted.edges").read_bytes()
    one_l = (tmp_path / "one" / "planted.labels").read_bytes()
    two_l = (tmp_path / "two" / "planted.labels").read_bytes()
    assert one_e == two_e and one_l == two_l

    capsys.readouterr()
    assert main([
        "stats",
        "--edges", str(tmp_path / "one" / "planted.edges"),
        "--labels", str(tmp_path / "one" / "planted.labels"),
    ]) == 0
    row = capsys.readouterr().out.splitlines()[1].split()
    assert row[0] == "40"
    assert row[-1] == "2"


def test_synth_warns_on_heterophily(tmp_path, caplog):
    base = [
        "synth", "--nodes", "20", "--classes", "2", "--p-in", "0.01",
        "--p-out", "0.3", "--out-dir", str(tmp_path / "het"),
    ]
    with caplog.at_level(logging.WARNING, logger="hubwalk.cli"):
        assert main(base) == 0
    assert any("p_in < p_out" in r.getMessage() for r in caplog.records)

    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="hubwalk.cli"):
        assert main(base + ["--allow-heterophily"]) == 0
    assert not any("p_in < p_out" in r.getMessage() for r in caplog.records)


@pytest.fixture()
def small_planted_config(tmp_path):
    return write_config(
        tmp_path,
        synthetic={
            "n_nodes": 30, "n_classes": 2, "p_in": 0.3, "p_out": 0.05,
            "rng_seed": 1,
        },
        strategies=[
            {"strategy": "uniform"},
            {"strategy": "scwalk", "bias_probability": 0.85},
        ],
        dimensions=[4],
        walks_per_node=2,
        walk_length=10,
        sgns=TINY_SGNS,
    )


def test_embed_writes_cells_and_manifest(tmp_path, small_planted_config):
    out = tmp_path / "emb"
    assert main([
        "embed", "--config", small_planted_config, "--out-dir", str(out)
    ]) == 0
    assert (out / "uniform_d4.emb").exists()
    assert (out / "scwalk_p_0.85_d4.emb").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["artifacts"]) == 2
    strategies = {a["strategy"] for a in manifest["artifacts"]}
    assert strategies == {"uniform", "scwalk"}
    assert manifest["sgns"]["window"] == 3


def test_embed_reruns_byte_identically(tmp_path, small_planted_config):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["embed", "--config", small_planted_config,
                 "--out-dir", str(out_a)]) == 0
    assert main(["embed", "--config", small_planted_config,
                 "--out-dir", str(out_b)]) == 0
    for name in ("uniform_d4.emb", "scwalk_p_0.85_d4.emb", "manifest.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_embed_flag_overrides_config_strategies(tmp_path, small_planted_config):
    out = tmp_path / "override"
    assert main([
        "embed", "--config", small_planted_config, "--out-dir", str(out),
        "--strategy", "uniform",
    ]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert [a["strategy"] for a in manifest["artifacts"]] == ["uniform"]


def test_embed_reports_cell_failures(tmp_path, small_planted_config):
    out = tmp_path / "bad"
    code = main([
        "embed", "--config", small_planted_config, "--out-dir", str(out),
        "--dim", "-3",
    ])
    assert code == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["artifacts"] == []


def test_tune_writes_grid_table(tmp_path):
    config = write_config(
        tmp_path,
        synthetic={
            "n_nodes": 24, "n_classes": 2, "p_in": 0.4, "p_out": 0.1,
            "rng_seed": 2,
        },
        dimensions=[4],
        walks_per_node=2,
        walk_length=8,
        sgns=TINY_SGNS,
        return_grid=[1.0],
        inout_grid=[0.5, 2.0],
    )
    out = tmp_path / "tune"
    assert main(["tune", "--config", config, "--out-dir", str(out)]) == 0
    payload = json.loads((out / "tune.json").read_text())
    assert len(payload["table"]) == 2
    assert payload["dimension"] == 4
    assert "reconstruction_error" in payload["objective"]
    best = payload["best"]
    assert best["return_param"] == 1.0
    assert best["inout_param"] in (0.5, 2.0)
    errors = {row["inout_param"]: row["error"] for row in payload["table"]}
    assert errors[best["inout_param"]] == min(errors.values())


def eval_config(tmp_path, name="eval.json", **extra):
    return write_config(
        tmp_path,
        name=name,
        strategies=[
            {"strategy": "node2vec", "return_param": 1.0, "inout_param": 1.0},
            {"strategy": "scwalk", "bias_probability": 0.85},
        ],
        dimensions=[6],
        walks_per_node=2,
        walk_length=10,
        sgns=TINY_SGNS,
        folds=3,
        seeds=[0],
        **extra,
    )


def test_evaluate_writes_reports_and_diff_table(tmp_path, capsys):
    config = eval_config(tmp_path)
    out = tmp_path / "eval"
    assert main(["evaluate", "--config", config, "--out-dir", str(out)]) == 0

    reports = sorted(p.name for p in out.glob("report_*.json"))
    assert reports == [
        "report_node2vec_return_1_inout_1_d6_svm.json",
        "report_scwalk_p_0.85_d6_svm.json",
    ]
    report = json.loads((out / reports[1]).read_text())
    assert report["label"] == "scwalk(p=0.85)"
    assert report["folds"] == 3
    assert "accuracy_mean" in report["summary"]
    assert report["source"]["synthetic"] is None  # bundled dataset run

    import csv

    with open(out / "diff_table.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 1
    assert set(rows[0]) == {
        "dimension", "method", "baseline",
        "acc_diff", "prec_diff", "rec_diff", "f1_diff",
    }
    assert rows[0]["dimension"] == "6"
    assert rows[0]["method"] == "scwalk(p=0.85)"
    assert rows[0]["baseline"] == "node2vec(return=1,inout=1)"

    printed = capsys.readouterr().out
    assert "scwalk(p=0.85) dim=6 svm: accuracy=" in printed


def test_evaluate_single_cell_skips_diff_table(tmp_path):
    config = write_config(
        tmp_path,
        dimensions=[4],
        walks_per_node=2,
        walk_length=10,
        sgns=TINY_SGNS,
        folds=3,
    )
    out = tmp_path / "single"
    assert main([
        "evaluate", "--config", config, "--out-dir", str(out),
        "--strategy", "uniform",
    ]) == 0
    assert not (out / "diff_table.csv").exists()
    assert len(list(out.glob("report_*.json"))) == 1


def test_evaluate_multiple_dimensions_add_pooled_rows(tmp_path):
    import csv

    config = eval_config(tmp_path, name="two_dims.json")
    override = json.loads((tmp_path / "two_dims.json").read_text())
    override["dimensions"] = [4, 6]
    (tmp_path / "two_dims.json").write_text(json.dumps(override))
    out = tmp_path / "pooled"
    assert main([
        "evaluate", "--config", str(tmp_path / "two_dims.json"),
        "--out-dir", str(out),
    ]) == 0
    with open(out / "diff_table.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    dims = [row["dimension"] for row in rows]
    assert dims == ["4", "6", "all"]
    per_dim = [float(r["acc_diff"]) for r in rows[:2]]
    assert float(rows[2]["acc_diff"]) == pytest.approx(sum(per_dim) / 2)


def test_evaluate_respects_explicit_baseline(tmp_path):
    import csv

    config = eval_config(tmp_path, baseline="scwalk(p=0.85)")
    out = tmp_path / "base"
    assert main(["evaluate", "--config", config, "--out-dir", str(out)]) == 0
    with open(out / "diff_table.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert rows[0]["baseline"] == "scwalk(p=0.85)"
    assert rows[0]["method"] == "node2vec(return=1,inout=1)"


def test_evaluate_propagates_experiment_failures(tmp_path):
    config = eval_config(tmp_path)
    out = tmp_path / "fail"
    code = main([
        "evaluate", "--config", config, "--out-dir", str(out),
        "--folds", "99",  # more folds than karate nodes
    ])
    assert code == 1
    assert not list(out.glob("report_*.json"))


def test_evaluate_nb_classifier(tmp_path):
    config = write_config(
        tmp_path,
        dimensions=[4],
        walks_per_node=2,
        walk_length=10,
        sgns=TINY_SGNS,
        folds=3,
    )
    out = tmp_path / "nb"
    assert main([
        "evaluate", "--config", config, "--out-dir", str(out),
        "--strategy", "uniform", "--classifier", "nb",
    ]) == 0
    assert (out / "report_uniform_d4_nb.json").exists()


def test_unknown_subcommand_exits_with_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
