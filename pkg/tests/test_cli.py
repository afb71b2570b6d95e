import json
import math
import time

import numpy as np
import pytest

from inozemtsev import cli
from inozemtsev.bethe_two import BetheError
from inozemtsev.chain_model import ChainParams, Variant, ed_spectrum

PI = math.pi


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(capsys, *argv, fmt="json"):
    code, out, _ = run(capsys, *argv, "--format", fmt)
    assert code == 0
    return cli.decode_records(out, fmt)


class TestParsing:
    def test_grid(self):
        assert cli.parse_grid("1:3:3") == [1.0, 2.0, 3.0]
        g = cli.parse_grid("0.001:10:5log")
        assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(10) and g[2] == pytest.approx(0.1)

    @pytest.mark.parametrize("bad", ["1:2", "a:b:3", "1:2:0", "0:1:3log"])
    def test_grid_rejects(self, bad):
        with pytest.raises((ValueError, cli.ValidationError)):
            cli.parse_grid(bad)

    def test_pairs_and_tol(self):
        assert cli.parse_pairs("I1=1,I2=2") == {"I1": "1", "I2": "2"}
        assert cli.parse_tol(["ed=1e-6"])["ed"] == 1e-6


class TestSpectrum:
    def test_bound_row(self, capsys):
        recs = records(capsys, "spectrum", "--length", "6", "--kappa", "1", "--only", "I1=1,I2=1")
        assert len(recs) == 1
        r = recs[0]
        assert r.kind.value == "Bound"
        assert r.residuals["constraint"] < 1e-8

    def test_sector_counts(self, capsys):
        for L in (5, 6, 9):
            recs = records(capsys, "spectrum", "--length", str(L), "--kappa", "1")
            assert len(recs) == L * (L - 1) // 2

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip(self, capsys, fmt):
        direct = cli.spectrum_records(7, 0.8)
        assert records(capsys, "spectrum", "--length", "7", "--kappa", "0.8", fmt=fmt) == direct

    def test_verify_ed(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--length", "8", "--kappa", "1.5", "--verify-ed", "--format", "json")
        assert code == 0
        rows = json.loads(out)["rows"]
        assert max(r["ed_gap"] for r in rows) < 1e-8

    def test_verify_ed_tolerance_violation(self, capsys):
        code, _, err = run(capsys, "spectrum", "--length", "6", "--kappa", "1", "--verify-ed", "--tol", "ed=1e-30")
        assert code == 1 and "ed_gap" in err

    def test_sectors(self, capsys):
        assert len(records(capsys, "spectrum", "--length", "6", "--kappa", "1", "--sector", "0")) == 1
        one = records(capsys, "spectrum", "--length", "6", "--kappa", "1", "--sector", "1")
        assert np.allclose(sorted(r.energy for r in one), ed_spectrum(ChainParams(6, 1.0), 1), atol=1e-10)

    def test_only_kind(self, capsys):
        recs = records(capsys, "spectrum", "--length", "8", "--kappa", "1", "--only", "kind=exceptional")
        assert [(r.I1, r.I2) for r in recs] == [(2, 2)]

    def test_file_output(self, capsys, tmp_path):
        path = tmp_path / "s.csv"
        code, out, _ = run(capsys, "spectrum", "--length", "5", "--kappa", "1", "--out", str(path))
        assert code == 0 and out == ""
        assert path.read_text().splitlines()[0].split(",") == cli.COLUMNS


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["spectrum", "--length", "6", "--kappa", "-1"],
            ["spectrum", "--length", "6"],
            ["spectrum", "--length", "6", "--kappa", "1", "--only", "foo=1"],
            ["crit", "--length", "8", "--n", "5"],
            ["sweep", "--length", "6", "--kappa-grid", "1:2"],
        ],
    )
    def test_validation(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == cli.EXIT_VALIDATION and err

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["spectrum", "--frobnicate"])
        assert exc.value.code == cli.EXIT_VALIDATION

    def test_solver(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise BetheError("no root")

        monkeypatch.setattr(cli, "spectrum_records", boom)
        code, _, err = run(capsys, "spectrum", "--length", "6", "--kappa", "1")
        assert code == cli.EXIT_SOLVER and "no root" in err

    def test_io(self, capsys, tmp_path):
        code, _, err = run(capsys, "diag", "--length", "4", "--kappa", "1", "--out", str(tmp_path / "no" / "x.csv"))
        assert code == cli.EXIT_IO and err


class TestSweep:
    def test_trivial_grid(self, capsys):
        code, out, err = run(capsys, "sweep", "--length", "6", "--kappa-grid", "1:1.01:2", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and doc["crossings"] == [] and "crossing" not in err
        assert len(doc["rows"]) == 2 * 15

    def test_endpoints(self, capsys, tmp_path):
        svg = tmp_path / "e.svg"
        code, out, _ = run(
            capsys, "sweep", "--length", "6", "--kappa-grid", "0.001:50:2log", "--format", "json", "--svg", str(svg)
        )
        assert code == 0
        rows = json.loads(out)["rows"]
        heis = np.sort([r["E_n"] for r in rows if r["kappa"] > 1])
        assert np.max(np.abs(heis - ed_spectrum(ChainParams(6, 1.0), 2, Variant.CONTACT))) < 1e-5
        # kappa=1e-3: HS energies 2 pi^2 n / L^2 up to an O(kappa) shift
        u = 2 * PI**2 / 36
        for r in rows:
            if r["kappa"] < 1 and r["E_n"] > 0:
                e = r["E_n"]
                assert abs(e - u * round(e / u)) < 1e-3 * e
        assert svg.read_text().startswith("<svg")

    def test_crossings_reported(self, capsys):
        code, out, err = run(capsys, "sweep", "--length", "6", "--kappa-grid", "0.001:50:2log", "--format", "json")
        assert json.loads(out)["crossings"] and "crossing" in err


class TestCrit:
    def test_fix_kappa(self, capsys):
        code, out, _ = run(capsys, "crit", "--kappa", "1", "--n", "2,3", "--format", "json")
        rows = json.loads(out)["rows"]
        assert code == 0
        assert rows[0]["L_cr_i"] == pytest.approx(6.9, abs=0.1) and rows[0]["L_cr_r"] is None
        assert rows[1]["L_cr_r"] == pytest.approx(23.2, abs=0.2)

    def test_heisenberg_like(self, capsys):
        _, out, _ = run(capsys, "crit", "--kappa", "30", "--n", "3", "--format", "json")
        assert abs(json.loads(out)["rows"][0]["L_cr_r"] - 21.9) < 0.3

    def test_fix_length(self, capsys):
        code, out, _ = run(capsys, "crit", "--length", "8", "--n", "2,4")
        lines = out.splitlines()
        assert code == 0 and lines[0] == "n,L,kappa_cr_i,kappa_cr_r"
        assert 0.78 < float(lines[1].split(",")[2]) < 0.83
        assert lines[2].split(",")[2:] == ["", ""]


class TestVerify:
    def test_elliptic_fast(self, capsys):
        t = time.perf_counter()
        code, out, _ = run(capsys, "verify", "--suite", "elliptic")
        assert code == 0 and json.loads(out)["pass"]
        assert time.perf_counter() - t < 10

    def test_bethe_l12(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "bethe", "--length", "12", "--kappa", "0.7")
        assert code == 0 and json.loads(out)["pass"]

    def test_all(self, capsys):
        code, out, _ = run(capsys, "verify")
        doc = json.loads(out)
        assert code == 0 and doc["pass"] and set(cli.SUITES) <= set(doc)


class TestDiag:
    def test_contact(self, capsys):
        code, out, _ = run(capsys, "diag", "--length", "4", "--kappa", "1", "--variant", "contact", "--format", "json")
        assert code == 0
        assert [r["E"] for r in json.loads(out)["rows"]] == pytest.approx([0, 2, 2, 2, 4, 6], abs=1e-12)

    def test_elliptic_matches_spectrum(self, capsys):
        _, out, _ = run(capsys, "diag", "--length", "7", "--kappa", "0.6", "--format", "json")
        ed = [r["E"] for r in json.loads(out)["rows"]]
        bethe = sorted(r.energy for r in cli.spectrum_records(7, 0.6))
        assert np.allclose(ed, bethe, rtol=1e-9, atol=1e-9)


def test_thread_determinism(capsys, monkeypatch):
    argv = ["spectrum", "--length", "12", "--kappa", "0.9", "--format", "csv"]
    monkeypatch.setenv("INO_THREADS", "1")
    a = run(capsys, *argv)
    monkeypatch.setenv("INO_THREADS", "4")
    b = run(capsys, *argv)
    assert a[0] == b[0] == 0 and a[1] == b[1]
