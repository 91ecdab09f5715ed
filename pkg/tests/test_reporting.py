# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Tests for CSV/JSON records, the worker pool and plotting.
"""
import json

import numpy as np
import pytest


class TestCsv:
    """Test CSV rendering and parsing."""

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_cell_formatting(self):
        """Floats use repr, booleans are lower-case, None is empty."""
        from reporting import render_csv

        text = render_csv(["a", "b", "c", "d"], [[1, 0.1, True, None], [2, float("nan"), False, "x"]])
        assert text == "a,b,c,d\n1,0.1,true,\n2,nan,false,x\n"

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_row_width_checked(self):
        """Rows must match the header."""
        from reporting import render_csv
        from errors import ValidationError

        with pytest.raises(ValidationError, match="does not match header"):
            render_csv(["a", "b"], [[1]])

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_read_columns(self, sample_csv):
        """Numeric columns come back as float arrays."""
        from reporting import read_csv_columns

        columns = read_csv_columns(sample_csv)
        np.testing.assert_array_equal(columns["N"], [16, 64, 256, 1024])
        assert columns["ratio"].dtype == float

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_label_columns_kept(self, temp_output_dir):
        """Non-numeric columns are kept as strings."""
        from reporting import read_csv_columns

        path = temp_output_dir / "blocks.csv"
        path.write_text("N1,case\n8,other\n16,plus_plus\n")
        assert list(read_csv_columns(path)["case"]) == ["other", "plus_plus"]

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_malformed_csv(self, temp_output_dir):
        """Missing files, empty files and ragged rows are reported."""
        from reporting import read_csv_columns
        from errors import ValidationError

        with pytest.raises(ValidationError, match="not found"):
            read_csv_columns(temp_output_dir / "missing.csv")
        empty = temp_output_dir / "empty.csv"
        empty.write_text("")
        with pytest.raises(ValidationError, match="empty"):
            read_csv_columns(empty)
        ragged = temp_output_dir / "ragged.csv"
        ragged.write_text("a,b\n1,2\n3\n")
        with pytest.raises(ValidationError, match="expected 2 cells"):
            read_csv_columns(ragged)


class TestOutputRecord:
    """Test the CSV + JSON pair every run writes."""

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_write_pair(self, temp_output_dir, mocker):
        """Both files land in the output directory with the expected content."""
        from reporting import OutputRecord

        mocker.patch("reporting.artifact_version", return_value="abc123")
        record = OutputRecord(
            subcommand="bilinear-sweep",
            header=["N", "ratio"],
            rows=[[256, 0.5], [64, 0.25]],
            results={"slope": np.float64(0.5), "bad": float("inf"), "flags": np.array([True, False])},
            config={"s": -1.0},
            sort_columns=1,
        )
        paths = record.write(temp_output_dir)
        assert paths["csv"].name == "bilinear_sweep.csv"
        assert paths["csv"].read_text() == "N,ratio\n64,0.25\n256,0.5\n"

        summary = json.loads(paths["json"].read_text())
        assert summary["artifact_version"] == "abc123"
        assert summary["subcommand"] == "bilinear-sweep"
        assert summary["results"] == {"bad": None, "flags": [True, False], "slope": 0.5}
        assert summary["config"] == {"s": -1.0}
        assert summary["schema_version"] == 1

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_atomic_write_leaves_no_temp_files(self, temp_output_dir):
        """Only the target remains after a write."""
        from reporting import atomic_write_text

        atomic_write_text(temp_output_dir / "nested" / "x.txt", "hello")
        assert [p.name for p in (temp_output_dir / "nested").iterdir()] == ["x.txt"]

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_artifact_version_without_git(self, mocker):
        """Outside a repository the version is 'nogit'."""
        import reporting

        reporting.artifact_version.cache_clear()
        mocker.patch("reporting.subprocess.run", side_effect=OSError("no git"))
        try:
            assert reporting.artifact_version() == "nogit"
        finally:
            reporting.artifact_version.cache_clear()


class TestRunParallel:
    """Test the worker pool."""

    @pytest.mark.unit
    @pytest.mark.reporting
    @pytest.mark.parametrize("threads", [1, 2, None])
    def test_order_preserved(self, threads):
        """Results come back in input order whatever the worker count."""
        from reporting import run_parallel

        assert run_parallel(lambda x: x * x, range(10), threads) == [x * x for x in range(10)]

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_empty_input(self):
        """No items, no work."""
        from reporting import run_parallel

        assert run_parallel(lambda x: x, []) == []


class TestPlots:
    """Test SVG rendering."""

    @pytest.mark.unit
    @pytest.mark.reporting
    @pytest.mark.parametrize("kind", ["loglog", "linear", "conservation"])
    def test_each_kind(self, sample_csv, kind):
        """Every plot kind writes an SVG next to the CSV."""
        from reporting import emit_plot

        out = emit_plot(sample_csv, kind)
        assert out == sample_csv.with_suffix(".svg")
        assert out.read_text().lstrip().startswith("<?xml")

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_unknown_kind(self, sample_csv):
        """Unknown kinds list the available ones."""
        from reporting import emit_plot
        from errors import ValidationError

        with pytest.raises(ValidationError, match="Available kinds"):
            emit_plot(sample_csv, "histogram")

    @pytest.mark.unit
    @pytest.mark.reporting
    def test_loglog_needs_positive_values(self, temp_output_dir):
        """A log-log plot of non-positive data is refused."""
        from reporting import emit_plot
        from errors import ValidationError

        path = temp_output_dir / "neg.csv"
        path.write_text("N,ratio\n1,-1\n2,-2\n")
        with pytest.raises(ValidationError, match="positive"):
            emit_plot(path, "loglog")
