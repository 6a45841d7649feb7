import json

import numpy as np
import pytest
from click.testing import CliRunner

import ManifoldLens.cli as cli
import ManifoldLens.models as models
import ManifoldLens.patchio as pio


def _invoke(*args):
    result = CliRunner().invoke(cli.main, [str(a) for a in args], catch_exceptions=False)
    assert result.exit_code == 0
    return result


def _load(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_synth_writes_patch_and_oracle(tmp_path):
    out = tmp_path / "g.csv"
    _invoke("synth", "--kind", "graph", "--d", 2, "--D", 5, "--n", 200, "--rho", 0.05,
            "--hessian", "2,0;0,3", "--seed", 4, "--out", out)
    oracle = _load(tmp_path / "g.oracle.json")
    assert oracle["schema_version"] == "1"
    assert oracle["kind"] == "synth_patch"
    assert oracle["oracle"]["sectional_distribution"] == [6.0]
    assert oracle["patch_file"] == "g.csv"
    patch = pio.read_patch(out)
    assert (patch.count, patch.ambient_dim) == (200, 5)
    assert patch.source == "synth:graph:4"


def test_synth_to_comparison_of_two_spheres(tmp_path):
    for seed in (1, 2):
        _invoke("synth", "--kind", "sphere", "--d", 3, "--D", 7, "--n", 1500, "--rho", 0.2,
                "--seed", seed, "--out", tmp_path / f"s{seed}.csv")
        _invoke("curvature", "--patch", tmp_path / f"s{seed}.csv", "--out", tmp_path / f"s{seed}.report.json")

    report = _load(tmp_path / "s1.report.json")
    assert report["kind"] == "curvature_report"
    assert report["dimension"] == 3
    assert 0.0 < report["provenance"]["curvature_noise"] < 0.1
    assert (tmp_path / "s1.report.sectional.csv").exists()

    _invoke("compare-curvature", "--a", tmp_path / "s1.report.json", "--b", tmp_path / "s2.report.json",
            "--out", tmp_path / "cmp.json", "--csv-dir", tmp_path / "csv")
    cmp = _load(tmp_path / "cmp.json")
    assert cmp["schema_version"] == "1"
    assert cmp["dimension_match"] is True
    assert 0.99 <= cmp["riemann"]["r0"] <= 1.01
    assert 0.99 <= cmp["sectional"]["r0"] <= 1.01
    # the three off-diagonal components of a round S^3 are fit noise
    assert cmp["riemann"]["filtered"] == 3
    assert cmp["sectional"]["filtered"] == 0
    assert (tmp_path / "csv" / "cmp.sectional.overlay.csv").exists()
    assert (tmp_path / "csv" / "cmp.sectional.ratio.csv").read_text().startswith("index,ratio,fitted\n")


def test_estimate_dim(tmp_path, synth_csv):
    patch = synth_csv("flat", kind="flat", d=3, D=8, n=100, rho=1.0, seed=2)
    out = tmp_path / "dim.json"
    _invoke("estimate-dim", "--patch", patch, "--out", out)
    payload = _load(out)
    assert payload["kind"] == "dimension_estimate"
    assert payload["dimension"] == 3
    assert payload["theta"] == 0.9
    assert len(payload["spectrum"]["eigenvalues"]) == 8


def test_frame_command(tmp_path, synth_csv):
    patch = synth_csv("sph", kind="sphere", d=2, D=4, n=300, rho=0.2, seed=3)
    _invoke("frame", "--patch", patch, "--out", tmp_path / "sph.frame.json")
    frame = pio.read_frame(tmp_path / "sph.frame.json")
    assert frame.dimension == 2
    assert frame.normal_rank == 1


def test_batch_curvature_and_report(tmp_path, synth_csv):
    paths = [
        synth_csv(f"p{seed}", kind="sphere", d=2, D=5, n=400, rho=0.1, seed=seed)
        for seed in (1, 2)
    ]
    runs = tmp_path / "runs"
    _invoke("--parallel", 2, "curvature", "--patch", paths[0], "--patch", paths[1],
            "--out-dir", runs, "--out", tmp_path / "batch.json")
    batch = _load(tmp_path / "batch.json")
    assert batch["kind"] == "curvature_batch"
    assert len(batch["reports"]) == 2
    assert (runs / "p1.report.json").exists()

    _invoke("report", "--dir", runs, "--out", tmp_path / "table.json")
    table = _load(tmp_path / "table.json")
    assert table["kind"] == "range_table"
    assert table["layers"] == {}
    assert table["dimensions"][0]["count"] == 2
    assert table["dimensions"][0]["mean"] == 2.0


def test_report_counts_comparisons(tmp_path):
    sr = models.SimilarRatio(np.ones(2), np.array([1.0, 2.0]), 0.0, 1.05, 1.05)
    for i, r0 in enumerate((1.05, 2.0)):
        sr.r0 = r0
        comparison = models.ManifoldComparison(3, 3, riemann=sr, sectional=sr, layer="fc7")
        payload = {"schema_version": "1", "kind": "curvature_comparison", **comparison.to_dict()}
        (tmp_path / f"c{i}.json").write_text(json.dumps(payload), encoding="utf-8")
    _invoke("report", "--dir", tmp_path, "--range", 0.9, 1.1, "--out", tmp_path / "out" / "t.txt")
    table = _load(tmp_path / "out" / "t.txt")
    assert table["range"] == [0.9, 1.1]
    assert table["layers"]["fc7"]["count"] == 2
    assert table["layers"]["fc7"]["sectional"] == pytest.approx(0.5)


def test_compare_euclid(tmp_path, synth_csv):
    a = synth_csv("a", kind="flat", d=3, D=6, n=80, rho=1.0, seed=1)
    out = tmp_path / "e.json"
    _invoke("compare-euclid", "--a", a, "--b", a, "--out", out)
    payload = _load(out)
    assert payload["kind"] == "euclidean_comparison"
    assert payload["reduced_dimension"] == 3
    assert payload["raw"]["mean_cross_distance"] == 0.0
    assert payload["normalized"]["fit"]["rmse"] < 1e-9


def test_augment_writes_grid_and_manifest(tmp_path):
    rng = np.random.default_rng(0)
    img = models.ImageMatrix(tuple(rng.integers(0, 256, size=(6, 5)).astype(float) for _ in range(3)))
    src = tmp_path / "tiny.ppm"
    pio.write_image(img, src)
    out_dir = tmp_path / "grid"
    _invoke("augment", "--input", src, "--out-dir", out_dir, "--k-max", 2, "--out", tmp_path / "sum.json")
    summary = _load(tmp_path / "sum.json")
    assert summary["count"] == 8
    manifest = _load(out_dir / "tiny.manifest.json")
    assert manifest["kind"] == "derivative_manifest"
    assert [e["ks"] for e in manifest["images"]][:2] == [[1, 1, 1], [1, 1, 2]]
    assert (out_dir / "tiny_2_1_2.ppm").exists()
    back = pio.read_image(out_dir / "tiny_1_1_1.ppm")
    assert (back.rows, back.cols) == (6, 5)


def test_run_success_returns_zero(tmp_path, synth_csv):
    patch = synth_csv("f", kind="flat", d=2, D=4, n=50, rho=1.0)
    assert cli.run(["estimate-dim", "--patch", str(patch), "--out", str(tmp_path / "d.json")]) == 0


def test_run_unknown_flag_is_usage_error(capsys):
    assert cli.run(["synth", "--bogus"]) == 2
    assert "bogus" in capsys.readouterr().err


def test_run_missing_file(tmp_path, capsys):
    assert cli.run(["curvature", "--patch", str(tmp_path / "missing.csv")]) == 1
    assert "Error:" in capsys.readouterr().err


def test_run_oversized_k_max(tmp_path, capsys):
    img = models.ImageMatrix((np.arange(20.0).reshape(4, 5),))
    src = tmp_path / "small.pgm"
    pio.write_image(img, src)
    code = cli.run(["augment", "--image", str(src), "--out-dir", str(tmp_path / "o"), "--k-max", "9999"])
    assert code == 1
    assert "k_max=9999" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_run_bad_theta(tmp_path, synth_csv):
    patch = synth_csv("f", kind="flat", d=2, D=4, n=50, rho=1.0)
    assert cli.run(["estimate-dim", "--patch", str(patch), "--theta", "1.5"]) == 1


def test_run_degenerate_patch_reports_stage(tmp_path, capsys):
    target = tmp_path / "same.csv"
    target.write_text("1,2,3\n1,2,3\n1,2,3\n", encoding="utf-8")
    assert cli.run(["curvature", "--patch", str(target)]) == 1
    assert "Error: [dimension]" in capsys.readouterr().err


def test_run_several_patches_need_out_dir(tmp_path, synth_csv):
    a = synth_csv("a", kind="flat", d=2, D=4, n=50, rho=1.0)
    assert cli.run(["curvature", "--patch", str(a), "--patch", str(a)]) == 1
