import numpy as np
import pytest

from seasonal_aggregate.errors import InputError
from seasonal_aggregate.ingest import (
    count_windows,
    ingest,
    parse_series,
    parse_timestamps,
    read_series,
    write_series,
)


class TestSeriesFiles:

    def test_values_and_pairs(self):
        text = "# header\n1.5\n\n2,3.5\n4\t-1\n"
        np.testing.assert_allclose(parse_series(text), [1.5, 3.5, -1.0])

    def test_bad_value_reports_line(self):
        with pytest.raises(InputError, match=":3:"):
            parse_series("1\n2\nthree\n")

    def test_too_many_fields(self):
        with pytest.raises(InputError):
            parse_series("1,2,3\n")

    def test_empty(self):
        with pytest.raises(InputError, match="no data"):
            parse_series("# only a comment\n")

    def test_write_then_read(self, tmp_path):
        path = tmp_path / "series.txt"
        write_series(str(path), [0.1, 2.0], header=["seed=1"])
        assert path.read_text().startswith("# seed=1\n")
        np.testing.assert_array_equal(read_series(str(path)), [0.1, 2.0])

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_series(str(tmp_path / "missing.txt"))


class TestWindows:

    def test_counts(self):
        result = count_windows([12.0, 0.0, 5.0], 10.0)
        np.testing.assert_array_equal(result.counts, [2.0, 1.0])
        assert result.start == 0.0
        assert result.n_windows == 2

    def test_empty_windows_count_zero(self):
        result = count_windows([0.0, 35.0], 10.0)
        np.testing.assert_array_equal(result.counts, [1.0, 0.0, 0.0, 1.0])

    def test_log_transform(self):
        result = count_windows([0.0, 1.0, 2.0, 15.0], 10.0, log_transform=True)
        np.testing.assert_allclose(result.values, np.log([4.0, 2.0]))

    def test_bad_window(self):
        with pytest.raises(InputError):
            count_windows([0.0], 0.0)

    def test_bad_timestamp_line(self):
        with pytest.raises(InputError, match=":2:"):
            parse_timestamps("100\nnoon\n")


def test_ingest_writes_metadata(tmp_path):
    log = tmp_path / "events.log"
    log.write_text("1000\n1005\n1012\n")
    out = tmp_path / "counts.txt"
    result = ingest(str(log), 10.0, log_transform=True, output=str(out), header=["run"])
    assert result.n_windows == 2
    np.testing.assert_allclose(read_series(str(out)), np.log1p([2.0, 1.0]))
    meta = (tmp_path / "counts.txt.meta").read_text().splitlines()
    assert meta[0] == "# run"
    assert "n_windows=2" in meta
    assert "transform=log(count+1)" in meta
