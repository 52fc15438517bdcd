import math
import os
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from tanchain import ChainConfig, InvalidConfigError, build_hamiltonian, diagonalize, find_max_fidelity, gaussian_packet
from tanchain.experiments import (
    Scenario,
    ScenarioId,
    Series,
    SweepSpec,
    default_scenario,
    peak_window,
    read_csv,
    render_svg,
    run_scenario,
    sweep,
    write_csv,
)
from tanchain.experiments.csvio import format_value

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "fidelity_small.csv")
SVG_NS = "{http://www.w3.org/2000/svg}"
SMALL = ChainConfig(l_eff=100, lam=1.0)


def golden_scenario():
    return Scenario("fig3", SMALL, widths=(6,), distances=(40,), samples=11)


class TestCsv:
    cell = st.one_of(
        st.integers(-(10**12), 10**12),
        st.floats(allow_nan=False),
        st.booleans(),
        st.text(alphabet="abcxyz_-", min_size=1, max_size=8).filter(lambda s: s not in ("true", "false", "inf", "nan")),
    )

    @given(st.lists(st.lists(cell, min_size=3, max_size=3), max_size=8))
    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_round_trip(self, tmp_path, rows):
        path = tmp_path / "t.csv"
        write_csv(path, ["a", "b", "c"], rows, [("key", 1.5), ("name", "fig3")])
        comments, cols, back = read_csv(path)
        assert comments == {"key": 1.5, "name": "fig3"}
        assert cols == ["a", "b", "c"]
        assert len(back) == len(rows)
        for r, b in zip(rows, back):
            for x, y in zip(r, b):
                if isinstance(x, float) and not isinstance(x, bool):
                    assert float(y) == x
                else:
                    assert y == x

    def test_empty_table_is_header_only(self, tmp_path):
        path = tmp_path / "e.csv"
        write_csv(path, ["t", "F"], [])
        assert path.read_text() == "t,F\n"
        assert read_csv(path) == ({}, ["t", "F"], [])

    def test_special_values(self):
        assert format_value(float("nan")) == "nan"
        assert format_value(-math.inf) == "-inf"
        assert format_value(True) == "true"
        assert format_value(np.float64(0.1)) == "0.10000000000000001"

    def test_ragged_row_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "r.csv", ["a", "b"], [[1]])

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError, match="cannot write"):
            write_csv(tmp_path / "missing" / "x.csv", ["a"], [])


class TestGolden:
    def test_fidelity_file_matches_golden(self, tmp_path):
        run_scenario(golden_scenario(), tmp_path)
        got = read_csv(tmp_path / "fig3" / "fidelity_delta6_L40.csv")
        want = read_csv(GOLDEN)
        assert got[1] == want[1] == ["t", "F", "delta", "L", "L_eff", "lambda"]
        assert {k: v for k, v in got[0].items() if k != "tanchain-version"} == {
            k: v for k, v in want[0].items() if k != "tanchain-version"
        }
        assert len(got[2]) == len(want[2]) == 11
        np.testing.assert_allclose(np.array(got[2], float), np.array(want[2], float), rtol=1e-10, atol=1e-12)


def _polylines(path):
    root = ET.parse(path).getroot()
    return [e for e in root.iter(f"{SVG_NS}polyline") if e.get("class") == "series"]


def _bounds(path):
    desc = ET.parse(path).getroot().find(f"{SVG_NS}desc").text
    vals = dict(re.findall(r"(\w+)=(\S+)", desc))
    return {k: float(v) for k, v in vals.items()}


class TestSvg:
    def test_single_series(self, tmp_path):
        path = render_svg([Series("a", [0.0, 1.0], [0.0, 1.0])], tmp_path / "a.svg")
        lines = _polylines(path)
        assert len(lines) == 1
        assert len(lines[0].get("points").split()) == 2

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            render_svg([Series("a", [], [])], tmp_path / "a.svg")

    def test_nonfinite_points_skipped(self, tmp_path):
        path = render_svg([Series("a", [0.0, 1.0, 2.0], [0.0, math.nan, 1.0])], tmp_path / "a.svg")
        assert len(_polylines(path)[0].get("points").split()) == 2

    def test_deterministic_bytes(self, tmp_path):
        s = [Series("a", np.linspace(0, 1, 50), np.sin(np.linspace(0, 1, 50)))]
        a = render_svg(s, tmp_path / "a.svg", "fig3")
        b = render_svg(s, tmp_path / "b.svg", "fig3")
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_fig2_files(self, tmp_path):
        paths = run_scenario(default_scenario("fig2"), tmp_path)
        svg = [p for p in paths if p.endswith(".svg")][0]
        assert len(_polylines(svg)) == 2
        root = ET.parse(svg).getroot()
        entries = [g for g in root.iter(f"{SVG_NS}g") if g.get("class") == "legend-entry"]
        assert len(entries) == 2

        # canvas coordinates invert back to the CSV values
        _, cols, rows = read_csv(os.path.join(tmp_path, "fig2", "spacings.csv"))
        data = np.array(rows, float)
        b = _bounds(svg)
        pts = np.array([p.split(",") for p in _polylines(svg)[0].get("points").split()], float)
        x = b["xmin"] + (pts[:, 0] - b["left"]) / b["width"] * (b["xmax"] - b["xmin"])
        y = b["ymax"] - (pts[:, 1] - b["top"]) / b["height"] * (b["ymax"] - b["ymin"])
        np.testing.assert_allclose(x, data[:, 0], rtol=1e-9, atol=1e-9 * (b["xmax"] - b["xmin"]))
        np.testing.assert_allclose(y, data[:, 1], rtol=0, atol=1e-9 * (b["ymax"] - b["ymin"]))


class TestScenarios:
    def test_custom_default_single_row(self, tmp_path):
        run_scenario(default_scenario("custom"), tmp_path)
        _, cols, rows = read_csv(tmp_path / "custom" / "fidelity.csv")
        assert len(rows) == 1
        assert rows[0][0] == 0.0 and rows[0][1] == pytest.approx(1.0, abs=1e-14)

    def test_fig2_low_spacings(self, tmp_path):
        run_scenario(default_scenario("fig2"), tmp_path)
        comments, cols, rows = read_csv(tmp_path / "fig2" / "spacings.csv")
        b0 = comments["b0"]
        for n, d, d_an in rows[:5]:
            assert d == pytest.approx((n + 1.5) * b0, rel=0.1)
            assert d_an == pytest.approx((n + 1.5) * b0, rel=1e-9)

    def test_fig6_spacings(self, tmp_path):
        run_scenario(default_scenario("fig6"), tmp_path)
        _, cols, rows = read_csv(tmp_path / "fig6" / "spectrum.csv")
        d = np.array([r[cols.index("D")] for r in rows[:60]])
        assert np.all(np.abs(d / 0.032 - 1) < 0.05)

    def test_validation_errors(self):
        with pytest.raises(InvalidConfigError):
            Scenario("fig3", SMALL, widths=(6, 6), distances=(40,)).validate()
        with pytest.raises(InvalidConfigError):
            Scenario("fig7", SMALL, widths=(), distances=(40,)).validate()
        with pytest.raises(InvalidConfigError):
            Scenario("fig3", SMALL, widths=(40,), distances=(80,)).validate()
        with pytest.raises(ValueError):
            Scenario("fig9", SMALL)

    def test_defaults_validate(self):
        for sid in ScenarioId:
            default_scenario(sid).validate()


class TestSweep:
    def test_single_point_matches_direct_search(self):
        spec = SweepSpec(SMALL, ({},), delta=6.0, distance=40)
        row = sweep(spec).rows[0]
        s = diagonalize(build_hamiltonian(SMALL))
        psi = gaussian_packet(SMALL, 20, 6.0)
        t, f = find_max_fidelity(SMALL, psi, peak_window(SMALL, s, "revival"), spectral=s)
        assert (row.t_star, row.f_star) == (t, f)
        assert row.diagnostics == "ok"

    def test_worker_count_does_not_change_table(self):
        spec = SweepSpec.grid(SMALL, "lam", [0.5, 1.0, 1.5], delta=6.0, distance=40)
        a = sweep(spec, workers=1)
        b = sweep(spec, workers=2)
        assert a.as_rows() == b.as_rows()
        assert a.fingerprint == b.fingerprint
        assert a.column("lambda").tolist() == [0.5, 1.0, 1.5]

    def test_error_rows_carry_diagnostics(self):
        spec = SweepSpec(SMALL, ({"delta": 6.0}, {"distance": 41}, {"delta": 60.0}), delta=6.0, distance=40)
        rows = sweep(spec).rows
        assert rows[0].diagnostics == "ok"
        assert rows[1].diagnostics.startswith("error: ValueError")
        assert rows[2].diagnostics.startswith("error: BoundaryTruncationError")
        assert math.isnan(rows[2].f_star)

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            SweepSpec(SMALL, ())
        with pytest.raises(ValueError):
            SweepSpec(SMALL, ({"bogus": 1},))
