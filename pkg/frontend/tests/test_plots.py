"""Frontend tests.

Result CSVs are produced by invoking the ``thzisac`` CLI as a subprocess with
reduced trial counts — the frontend is exercised strictly through the files
and commands a user would produce.
"""

import subprocess
import sys

import pytest

from isacplots import cli, render, schema


def run_experiment(tmp_path, preset, trials):
    cfg = tmp_path / f"{preset}.cfg"
    proc = subprocess.run(
        [sys.executable, "-m", "thzisac.cli", "preset", preset,
         "--out", str(cfg)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run(
        [sys.executable, "-m", "thzisac.cli", "run", str(cfg),
         "--trials", str(trials)],
        capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    out = {"fig3": "fig3_ccdf.csv", "fig4": "fig4_rmse.csv"}[preset]
    return tmp_path / out


@pytest.fixture(scope="module")
def ccdf_csv(tmp_path_factory):
    return run_experiment(tmp_path_factory.mktemp("ccdf"), "fig3", 300)


@pytest.fixture(scope="module")
def rmse_csv(tmp_path_factory):
    return run_experiment(tmp_path_factory.mktemp("rmse"), "fig4", 3)


class TestSchema:
    def test_valid_file_loads(self, ccdf_csv):
        rows = schema.load_rows(str(ccdf_csv))
        assert len(rows) == 8 * 141
        assert {r.waveform for r in rows} == {
            "ofdm", "dft-s-ofdm", "otfs", "dft-s-otfs"}

    def test_missing_file(self, tmp_path):
        with pytest.raises(schema.SchemaError):
            schema.load_rows(str(tmp_path / "nope.csv"))

    def test_empty_file(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("")
        with pytest.raises(schema.SchemaError, match="header"):
            schema.load_rows(str(p))

    def test_header_only(self, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text(",".join(schema.HEADER) + "\n")
        with pytest.raises(schema.SchemaError, match="no data rows"):
            schema.load_rows(str(p))

    def test_wrong_header(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(schema.SchemaError, match="bad header"):
            schema.load_rows(str(p))

    def test_field_count(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text(",".join(schema.HEADER) + "\npapr,ofdm,64\n")
        with pytest.raises(schema.SchemaError, match="fields"):
            schema.load_rows(str(p))

    def test_bad_integer_names_column(self, tmp_path):
        p = tmp_path / "i.csv"
        p.write_text(",".join(schema.HEADER)
                     + "\npapr,ofdm,sixty,16,,1,ccdf[01.0],5e-1\n")
        with pytest.raises(schema.SchemaError, match="column 'M'"):
            schema.load_rows(str(p))

    def test_non_finite_value(self, tmp_path):
        p = tmp_path / "n.csv"
        p.write_text(",".join(schema.HEADER)
                     + "\npapr,ofdm,64,16,,1,ccdf[01.0],nan\n")
        with pytest.raises(schema.SchemaError, match="non-finite"):
            schema.load_rows(str(p))

    def test_empty_snr_allowed(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text(",".join(schema.HEADER)
                     + "\npapr,ofdm,64,16,,1,ccdf[01.0],5e-1\n")
        rows = schema.load_rows(str(p))
        assert rows[0].snr_db != rows[0].snr_db  # nan


class TestRenderCcdf:
    def test_writes_image(self, ccdf_csv, tmp_path):
        out = tmp_path / "ccdf.png"
        render.render_ccdf(schema.load_rows(str(ccdf_csv)), str(out))
        assert out.stat().st_size > 0

    def test_exactly_four_labeled_curves(self, ccdf_csv, monkeypatch, tmp_path):
        labels = []
        import matplotlib.pyplot as plt
        orig = plt.Axes.legend

        def capture(ax, *a, **k):
            leg = orig(ax, *a, **k)
            labels.extend(t.get_text() for t in leg.get_texts())
            return leg

        monkeypatch.setattr(plt.Axes, "legend", capture)
        render.render_ccdf(schema.load_rows(str(ccdf_csv)),
                           str(tmp_path / "c.png"))
        assert len(labels) == 4
        assert len(set(labels)) == 4

    def test_rmse_rows_rejected(self, rmse_csv, tmp_path):
        with pytest.raises(schema.SchemaError, match="ccdf"):
            render.render_ccdf(schema.load_rows(str(rmse_csv)),
                               str(tmp_path / "x.png"))


class TestRenderRmse:
    def test_writes_image(self, rmse_csv, tmp_path):
        out = tmp_path / "rmse.png"
        render.render_rmse(schema.load_rows(str(rmse_csv)), str(out))
        assert out.stat().st_size > 0

    def test_ccdf_rows_rejected(self, ccdf_csv, tmp_path):
        with pytest.raises(schema.SchemaError, match="range_rmse_m"):
            render.render_rmse(schema.load_rows(str(ccdf_csv)),
                               str(tmp_path / "x.png"))


class TestCli:
    def test_end_to_end_ccdf(self, ccdf_csv, tmp_path, capsys):
        out = tmp_path / "fig3.png"
        rc = cli.main(["--kind", "ccdf", "--in", str(ccdf_csv),
                       "--out", str(out)])
        assert rc == 0
        assert out.exists()

    def test_end_to_end_rmse(self, rmse_csv, tmp_path, capsys):
        out = tmp_path / "fig4.png"
        rc = cli.main(["--kind", "rmse", "--in", str(rmse_csv),
                       "--out", str(out)])
        assert rc == 0
        assert out.exists()

    def test_schema_violation_nonzero_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,results,file\n1,2,3,4\n")
        out = tmp_path / "never.png"
        rc = cli.main(["--kind", "ccdf", "--in", str(bad), "--out", str(out)])
        assert rc == 2
        assert not out.exists()
        assert "schema error" in capsys.readouterr().err

    def test_missing_input_nonzero_exit(self, tmp_path, capsys):
        rc = cli.main(["--kind", "rmse", "--in", str(tmp_path / "no.csv"),
                       "--out", str(tmp_path / "o.png")])
        assert rc == 2
