import json

import numpy as np
import pytest

from sparseh2 import formats
from sparseh2.cli import main
from sparseh2.data import GenotypeMatrix
from sparseh2.errors import DimensionMismatch, ValidationError


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    cfg = d / "config.json"
    cfg.write_text(json.dumps({"n": 100, "N": 500, "params": {"q": 0.02}, "target_eta": 0.5, "seed": 3}))
    assert main(["simulate", str(cfg), str(d / "out")]) == 0
    return d / "out"


def test_simulate_outputs(dataset):
    W = formats.read_genotypes(dataset / "genotypes.csv")
    assert (W.n, W.N) == (100, 500)
    truth = formats.read_json(dataset / "truth.json")
    assert truth["target_eta"] == 0.5 and truth["eta"] == pytest.approx(0.5)
    assert list(truth)[:3] == ["eta", "target_eta", "sigma_e2"]
    assert formats.read_phenotype(dataset / "phenotype.csv").n == 100


def test_simulate_byte_identical(tmp_path, dataset):
    cfg = dataset.parent / "config.json"
    assert main(["simulate", str(cfg), str(tmp_path / "again"), "--threads", "2"]) == 0
    for name in ("genotypes.csv", "phenotype.csv", "truth.json"):
        assert (tmp_path / "again" / name).read_bytes() == (dataset / name).read_bytes()


def test_genotype_round_trip_and_slow_path(tmp_path, rng):
    W = GenotypeMatrix(rng.integers(0, 3, size=(7, 5)), tuple("abcde"))
    formats.write_genotypes(tmp_path / "g.csv", W)
    back = formats.read_genotypes(tmp_path / "g.csv")
    np.testing.assert_array_equal(back.values, W.values)
    assert back.snp_ids == W.snp_ids
    # spaces and CRLF defeat the fast path but parse the same
    text = (tmp_path / "g.csv").read_text().replace(",", ", ").replace("\n", "\r\n")
    (tmp_path / "h.csv").write_text(text)
    np.testing.assert_array_equal(formats.read_genotypes(tmp_path / "h.csv").values, W.values)


def test_bad_genotype_cell_located(tmp_path):
    (tmp_path / "g.csv").write_text("a,b\n0,1\n2,7\n1,1\n")
    with pytest.raises(ValidationError, match="line 3, column 2"):
        formats.read_genotypes(tmp_path / "g.csv")
    (tmp_path / "g2.csv").write_text("a,b\n0,1\n2\n")
    with pytest.raises(ValidationError, match="line 3"):
        formats.read_genotypes(tmp_path / "g2.csv")


def test_phenotype_and_covariate_parsing(tmp_path):
    (tmp_path / "p.csv").write_text("y\n1.5\n-2\n")
    np.testing.assert_array_equal(formats.read_phenotype(tmp_path / "p.csv").values, [1.5, -2.0])
    (tmp_path / "bad.csv").write_text("y\n1.5\nabc\n")
    with pytest.raises(ValidationError, match="line 3"):
        formats.read_phenotype(tmp_path / "bad.csv")
    (tmp_path / "two.csv").write_text("y,z\n1,2\n")
    with pytest.raises(ValidationError):
        formats.read_phenotype(tmp_path / "two.csv")
    (tmp_path / "c.csv").write_text("age,sex\n1,0\n2,1\n3,0\n4,1\n")
    fx = formats.read_covariates(tmp_path / "c.csv")
    assert fx.names == ("age", "sex") and fx.X.shape == (4, 2)
    with pytest.raises(DimensionMismatch, match="g.csv.*c.csv"):
        formats.check_rows(5, "g.csv", 4, "c.csv")


def test_report_round_trip():
    r = formats.RunReport(
        config={"mode": "esther", "seed": 1}, mode="esther", eta_hat=0.1 + 0.2, sigma2_hat=1 / 3,
        se=float("nan"), ci_low=0.0, ci_high=0.7, N_final=2,
        selected=[{"id": "snp3", "column": 3, "frequency": 0.8}], flags=["boundary"],
    )
    text = r.emit()
    assert formats.RunReport.parse(text) == r
    assert formats.RunReport.parse(text).emit() == text
    assert json.loads(text)["eta_hat"] == 0.1 + 0.2
    d = formats.DecisionReport(
        config={}, thresholds=[{"threshold": 0.7, "eta_hat": 0.5, "ci_low": 0.1, "ci_high": 0.9, "N_final": 3}],
        overlap_count=15.25, cutoff=10.0, verdict="esther", flags=[], chosen_threshold=0.76,
        eta_hat=0.5, sigma2_hat=2.0, se=0.1, ci_low=0.1, ci_high=0.9, N_final=3,
    )
    assert formats.DecisionReport.parse(d.emit()) == d


def test_estimate_oracle_covers_truth(dataset, tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["estimate", str(dataset / "genotypes.csv"), str(dataset / "phenotype.csv"),
                 "--mode", "oracle", "--truth", str(dataset / "truth.json"), "--out", str(out)])
    assert code == 0
    rep = formats.RunReport.parse(out.read_text())
    assert rep.ci_low <= 0.5 <= rep.ci_high
    assert rep.recovery["capture_fraction"] == 1.0
    assert rep.timings is None
    assert "eta_hat" in capsys.readouterr().out


def test_estimate_hilmm_with_timings(dataset, tmp_path):
    out = tmp_path / "r.json"
    assert main(["estimate", str(dataset / "genotypes.csv"), str(dataset / "phenotype.csv"),
                 "--mode", "hilmm", "--bootstrap-K", "20", "--timings", "--out", str(out)]) == 0
    rep = formats.RunReport.parse(out.read_text())
    assert rep.N_final == 500 and rep.selected == [] and set(rep.timings) >= {"prepare", "estimate"}


def test_exit_codes(dataset, tmp_path, capsys):
    g = str(dataset / "genotypes.csv")
    assert main(["estimate", g, str(tmp_path / "missing.csv")]) == 2
    assert "missing.csv" in capsys.readouterr().err
    short = tmp_path / "short.csv"
    short.write_text("y\n1\n2\n3\n")
    assert main(["estimate", g, str(short)]) == 2
    assert "short.csv" in capsys.readouterr().err
    const = tmp_path / "const.csv"
    const.write_text("y\n" + "1.0\n" * 100)
    assert main(["estimate", g, str(const), "--subsamples", "4"]) == 1
    assert main(["estimate", g, str(dataset / "phenotype.csv"), "--mode", "oracle"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["estimate", g, str(dataset / "phenotype.csv"), "--mode", "bogus"]) == 2


def test_calibrate_command(dataset, tmp_path, capsys):
    out = tmp_path / "cal.csv"
    assert main(["calibrate", str(dataset / "genotypes.csv"), "--eta-grid", "0.4,0.7", "--q-grid", "0.02",
                 "--thresholds", "0.6,0.7,0.8", "--reps", "2", "--subsamples", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("eta,q,threshold") and len(lines) == 1 + 2 * 1 * 3
    assert "best threshold" in capsys.readouterr().out


def test_decide_zero_cutoff(dataset, tmp_path):
    out = tmp_path / "d.json"
    assert main(["decide", str(dataset / "genotypes.csv"), str(dataset / "phenotype.csv"), "--cutoff", "0",
                 "--threshold", "0.5", "--subsamples", "8", "--bootstrap-K", "20", "--out", str(out)]) == 0
    rep = formats.DecisionReport.parse(out.read_text())
    assert len(rep.thresholds) == 16
    assert rep.verdict == "esther" or "all_thresholds_empty" in rep.flags
