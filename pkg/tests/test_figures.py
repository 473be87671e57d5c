"""Figure artifact generation: naming, formats, determinism, degradation.

Heavy builders are exercised through their parameter overrides so the suite
stays fast; the full-size defaults are covered by the command-line layer and
by direct invocation outside the test run.
"""

import json
import math

import numpy as np
import pytest

from pairsqueeze.figures import FIGURES, SUPEROP_BUDGET, run_figure


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    return header, np.asarray(rows)


class TestRunFigureContract:
    def test_unknown_name_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown figure"):
            run_figure("fig9z", out_dir=tmp_path)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unsupported formats"):
            run_figure("fig2a", out_dir=tmp_path, formats=("csv", "png"))

    def test_names_registry(self):
        assert "fig2a" in FIGURES and "figS6" in FIGURES
        assert len(FIGURES) == 11

    def test_format_selection_limits_outputs(self, tmp_path):
        paths = run_figure("fig2a", out_dir=tmp_path, formats=("csv",))
        assert [p.suffix for p in paths] == [".csv"]


class TestArtifacts:
    def test_fig2a_table_and_fits(self, tmp_path):
        paths = run_figure("fig2a", out_dir=tmp_path)
        names = {p.name for p in paths}
        assert names == {"fig2a.csv", "fig2a_fits.json", "fig2a.svg"}
        header, rows = _read_csv(tmp_path / "fig2a.csv")
        assert header[0] == "r"
        assert rows.shape[0] > 10 and rows.shape[1] == len(header)
        fits = json.loads((tmp_path / "fig2a_fits.json").read_text())
        # Large-spin floors sit below small-spin floors.
        floors = [v for k, v in sorted(fits.items()) if k.startswith("floor_S")]
        assert all(a > b for a, b in zip(floors, floors[1:]))
        svg = (tmp_path / "fig2a.svg").read_text()
        assert svg.lstrip().startswith("<?xml")

    def test_figS3_dark_residuals_tiny(self, tmp_path):
        run_figure("figS3", out_dir=tmp_path)
        fits = json.loads((tmp_path / "figS3_fits.json").read_text())
        residuals = list(fits["dark_residuals_r1"].values())
        assert residuals and all(v < 1e-10 for v in residuals)

    def test_figS2_small_total(self, tmp_path):
        run_figure("figS2", out_dir=tmp_path, total_number=6,
                   r_grid=np.linspace(0.5, 2.0, 4))
        header, rows = _read_csv(tmp_path / "figS2.csv")
        assert header == ["deltaN_over_N", "xi2_opt", "r_opt"]
        # Equal split first (delta = 0), with the infinite-squeezing floor.
        assert rows[0, 0] == 0.0
        assert math.isinf(rows[0, 2])
        # Mismatch costs squeezing: unequal splits sit above the equal floor.
        assert np.all(rows[1:, 1] > rows[0, 1])


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            run_figure("fig2a", out_dir=d)
            run_figure("figS3", out_dir=d)
        for p in sorted(a.iterdir()):
            assert (b / p.name).read_bytes() == p.read_bytes(), p.name


class TestBudgetDegradation:
    def test_figS4_drops_oversized_spins(self, tmp_path):
        # Budget 300 keeps (2S+1)^4 for S in {1, 1.5} and drops S = 2.
        with pytest.warns(RuntimeWarning, match="budget 300 exceeded"):
            run_figure("figS4", out_dir=tmp_path, S=1.0,
                       r_values=(0.6, 1.0), spin_values=(1.0, 1.5, 2.0),
                       budget=300)
        header, rows = _read_csv(tmp_path / "figS4c.csv")
        assert header == ["t", "infidelity_S1", "infidelity_S1.5"]
        fits = json.loads((tmp_path / "figS4_fits.json").read_text())
        # The degraded two-spin set still yields a finite fitted exponent.
        assert math.isfinite(fits["size_exponent"])

    def test_figS4_panel_spin_over_budget_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="exceeds the superoperator budget"):
            run_figure("figS4", out_dir=tmp_path, S=3.0, budget=300)

    def test_default_budget_value(self):
        assert SUPEROP_BUDGET == 4096
