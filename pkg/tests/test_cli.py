import csv
import json

import pytest

from graphprivacy.cli import main
from graphprivacy.graph import load_edge_list, write_edge_list

from helpers import plc_graph


@pytest.fixture
def edges(tmp_path):
    path = tmp_path / "g.edges"
    write_edge_list(plc_graph(150, 2, seed=1), path)
    return path


def test_stats(edges, tmp_path, capsys):
    assert main(["stats", str(edges), "--path-sample", "20"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("Dataset,Nodes,Edges") and out[1].startswith("g,150,")
    assert main(["stats", str(edges), "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").exists()


def test_anonymize_deanonymize_metrics(edges, tmp_path, capsys):
    anon, mp, est = tmp_path / "a.edges", tmp_path / "map.csv", tmp_path / "est.jsonl"
    assert main(["anonymize", "--algo", "switch", "--param", "r=0.1", "--seed", "3", str(edges), str(anon), str(mp)]) == 0
    with open(mp) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["original_id", "anonymized_id"] and len(rows) == 150
    assert load_edge_list(anon).edge_count == load_edge_list(edges).edge_count

    assert main(["deanonymize", "--algo", "ns", "--seeds", "10", "--aux-ratio", "0.9", "--seed", "1",
                 str(edges), str(anon), str(mp), str(est)]) == 0
    rec = json.loads(est.read_text().splitlines()[0])
    assert set(rec) == {"anon_id", "true_aux_id", "candidates"}
    meta = json.loads((tmp_path / "est.jsonl.meta.json").read_text())
    assert meta["total_nodes"] == 150

    capsys.readouterr()
    assert main(["metrics", str(est)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "metric,level,value" and len(lines) == 27


def test_run_report_suite(edges, tmp_path, capsys):
    cfg = {"datasets": [str(edges)], "anonymizers": [{"kind": "Switch"}], "deanonymizers": [{"kind": "DV"}],
           "seed_schedule": [2, 5, 10], "strength_types": ["seeds"],
           "replication": {"min": 2, "max": 2}, "output_dir": str(tmp_path / "store")}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert main(["run", str(tmp_path / "cfg.json"), "--report"]) == 0
    assert (tmp_path / "store" / "reports" / "summary.json").exists()
    assert main(["report", str(tmp_path / "store"), "--out", str(tmp_path / "rep")]) == 0
    capsys.readouterr()
    assert main(["suite", str(tmp_path / "store"), "--preset", "S3"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("S3,")
    assert main(["suite", str(tmp_path / "store"), "--metrics", "entropy,pearson_correlation",
                 "--weights", "0.3,0.7"]) == 0
    assert main(["suite", str(tmp_path / "store"), "--search", "entropy,pearson_correlation"]) == 0


def test_exit_codes(edges, tmp_path):
    assert main(["stats", str(tmp_path / "missing.edges")]) == 3
    bad = tmp_path / "bad.edges"
    bad.write_text("1 2\nlonely\n")
    assert main(["stats", str(bad)]) == 3
    (tmp_path / "cfg.json").write_text(json.dumps({"datasets": [str(edges)], "seed_schedule": [5, 1]}))
    assert main(["run", str(tmp_path / "cfg.json")]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["run", str(tmp_path / "bad.json")]) == 2
    assert main(["anonymize", "--algo", "kda", "--param", "zz=1", str(edges), "a", "b"]) == 2
    assert main(["report", str(tmp_path)]) == 3
    with pytest.raises(SystemExit) as exc:
        main(["anonymize", "--algo", "unknown", "a", "b", "c"])
    assert exc.value.code == 2
