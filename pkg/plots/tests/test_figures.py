"""Rendering behaviour: one figure per kind, determinism, rejection."""

import numpy as np
import pytest

from muskatplots import (EmptyInputError, PlotJob, SchemaError, read_spectrum,
                         render)


@pytest.fixture
def out_png(tmp_path):
    return tmp_path / "figure.png"


class TestRenderKinds:
    def test_bifurcation_diagram(self, branch_paths, out_png):
        path = render(PlotJob("bifurcation", branch_paths, out_png))
        assert path == out_png
        assert out_png.stat().st_size > 0

    def test_single_branch_diagram(self, data_dir, out_png):
        render(PlotJob("bifurcation", (data_dir / "branch_l1.csv",), out_png))
        assert out_png.stat().st_size > 0

    def test_finger_profile(self, data_dir, out_png):
        render(PlotJob("finger", (data_dir / "branch_l2.csv",), out_png))
        assert out_png.stat().st_size > 0

    def test_spectrum(self, data_dir, out_png):
        render(PlotJob("spectrum", (data_dir / "spectrum.csv",), out_png))
        assert out_png.stat().st_size > 0

    def test_decay_with_fit_overlay(self, data_dir, out_png):
        render(PlotJob("decay",
                       (data_dir / "trajectory.csv", data_dir / "fits.csv"),
                       out_png))
        assert out_png.stat().st_size > 0

    def test_decay_without_fit(self, data_dir, out_png):
        render(PlotJob("decay", (data_dir / "trajectory.csv",), out_png))
        assert out_png.stat().st_size > 0

    def test_title_override_changes_figure(self, data_dir, tmp_path):
        src = (data_dir / "spectrum.csv",)
        plain = render(PlotJob("spectrum", src, tmp_path / "plain.png"))
        titled = render(PlotJob("spectrum", src, tmp_path / "titled.png",
                                title="stable regime"))
        assert plain.read_bytes() != titled.read_bytes()

    def test_svg_output(self, data_dir, tmp_path):
        out = render(PlotJob("finger", (data_dir / "branch_l3.csv",),
                             tmp_path / "figure.svg"))
        assert b"<svg" in out.read_bytes()[:200]


class TestDeterminism:
    @pytest.mark.parametrize("suffix", [".png", ".svg"])
    def test_byte_identical_rerender(self, data_dir, tmp_path, suffix):
        src = (data_dir / "spectrum.csv",)
        first = render(PlotJob("spectrum", src, tmp_path / f"a{suffix}"))
        second = render(PlotJob("spectrum", src, tmp_path / f"b{suffix}"))
        assert first.read_bytes() == second.read_bytes()


class TestStableSpectrumFixture:
    def test_every_nonzero_mode_decays(self, data_dir):
        # surface tension above the buoyancy jump: only m = 0 is neutral
        table = read_spectrum(data_dir / "spectrum.csv")
        m, rate = table.column("m"), table.column("rate")
        assert rate[m == 0][0] == 0.0
        assert np.all(rate[m >= 1] < 0.0)


class TestRejection:
    def test_wrong_schema_writes_nothing(self, data_dir, out_png):
        with pytest.raises(SchemaError, match="not a branch file"):
            render(PlotJob("bifurcation", (data_dir / "spectrum.csv",),
                           out_png))
        assert not out_png.exists()

    def test_empty_input_writes_nothing(self, tmp_path, out_png):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(EmptyInputError):
            render(PlotJob("spectrum", (empty,), out_png))
        assert not out_png.exists()

    def test_unknown_kind(self, data_dir, out_png):
        with pytest.raises(ValueError, match="unknown plot kind 'surface'"):
            render(PlotJob("surface", (data_dir / "spectrum.csv",), out_png))

    def test_unsupported_suffix(self, data_dir, tmp_path):
        with pytest.raises(ValueError, match="unsupported output format"):
            render(PlotJob("spectrum", (data_dir / "spectrum.csv",),
                           tmp_path / "figure.pdf"))

    def test_input_count_enforced(self, branch_paths, out_png):
        with pytest.raises(ValueError, match=r"finger takes 1 input"):
            render(PlotJob("finger", branch_paths[:2], out_png))

    def test_decay_missing_fit_entry(self, data_dir, out_png):
        job = PlotJob("decay",
                      (data_dir / "trajectory.csv", data_dir / "fits.csv"),
                      out_png, mode=3)
        with pytest.raises(ValueError, match="no fit entry for mode 3"):
            render(job)
        assert not out_png.exists()

    def test_decay_mode_not_stored(self, data_dir, out_png):
        job = PlotJob("decay", (data_dir / "trajectory.csv",), out_png,
                      mode=9)
        with pytest.raises(SchemaError, match="no columns for mode 9"):
            render(job)
        assert not out_png.exists()
