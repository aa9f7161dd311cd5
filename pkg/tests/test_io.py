"""CSV loading, config parsing, formatting, and the diabetes fixture hooks."""
import numpy as np
import pytest

from rpmlogit import estimation, io, simulate

LABELED = """\
x1,x2,group
0.5,1.0,a
-0.25,0.0,b
2.0,-1.5,c
"""


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _labeled_spec(path):
    return io.DatasetSpec(
        path=path, predictors=("x1", "x2"), response="group", categories=("a", "b", "c")
    )


class TestDatasetSpec:
    def test_requires_exactly_one_response_style(self):
        with pytest.raises(ValueError, match="exactly one"):
            io.DatasetSpec(path="f", predictors=("x",))
        with pytest.raises(ValueError, match="exactly one"):
            io.DatasetSpec(
                path="f", predictors=("x",), response="g",
                categories=("a", "b"), response_columns=("y0", "y1"),
            )

    def test_label_response_needs_categories(self):
        with pytest.raises(ValueError, match="category order"):
            io.DatasetSpec(path="f", predictors=("x",), response="g")

    def test_duplicate_categories_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            io.DatasetSpec(
                path="f", predictors=("x",), response="g", categories=("a", "a", "b")
            )

    def test_needs_predictors_and_two_onehot_columns(self):
        with pytest.raises(ValueError, match="predictor"):
            io.DatasetSpec(path="f", predictors=(), response="g", categories=("a", "b"))
        with pytest.raises(ValueError, match="at least 2"):
            io.DatasetSpec(path="f", predictors=("x",), response_columns=("y0",))


class TestLoadCsv:
    def test_three_labels_become_one_hot_with_last_as_reference(self, tmp_path):
        data = io.load_csv(_labeled_spec(_write(tmp_path, LABELED)))
        assert data.categories == ("a", "b", "c")
        np.testing.assert_array_equal(data.response, np.eye(3))
        # intercept column prepended, predictors in the requested order
        np.testing.assert_allclose(
            data.design,
            [[1.0, 0.5, 1.0], [1.0, -0.25, 0.0], [1.0, 2.0, -1.5]],
        )
        assert len(data.digest) == 16

    def test_category_order_controls_columns(self, tmp_path):
        path = _write(tmp_path, LABELED)
        spec = io.DatasetSpec(
            path=path, predictors=("x1",), response="group", categories=("c", "b", "a")
        )
        data = io.load_csv(spec)
        np.testing.assert_array_equal(data.response, np.eye(3)[::-1])

    def test_one_hot_columns_accepted(self, tmp_path):
        text = "x,y0,y1,y2\n1.0,1,0,0\n2.0,0,0,1\n"
        spec = io.DatasetSpec(
            path=_write(tmp_path, text),
            predictors=("x",),
            response_columns=("y0", "y1", "y2"),
        )
        data = io.load_csv(spec)
        np.testing.assert_array_equal(data.response, [[1, 0, 0], [0, 0, 1]])
        assert data.categories == ("y0", "y1", "y2")

    def test_blank_lines_skipped(self, tmp_path):
        data = io.load_csv(_labeled_spec(_write(tmp_path, LABELED + "\n\n")))
        assert data.design.shape == (3, 3)

    def test_missing_column_cites_header(self, tmp_path):
        path = _write(tmp_path, LABELED)
        spec = io.DatasetSpec(
            path=path, predictors=("x1", "zz"), response="group",
            categories=("a", "b", "c"),
        )
        with pytest.raises(ValueError, match=r"'zz' not in header"):
            io.load_csv(spec)

    def test_short_row_cites_line(self, tmp_path):
        text = "x1,x2,group\n0.5,1.0,a\n-0.25,b\n"
        with pytest.raises(ValueError, match="line 3: expected 3 fields, got 2"):
            io.load_csv(_labeled_spec(_write(tmp_path, text)))

    def test_missing_value_cites_line_and_column(self, tmp_path):
        text = "x1,x2,group\n0.5,,a\n"
        with pytest.raises(ValueError, match="line 2: missing value in column 'x2'"):
            io.load_csv(_labeled_spec(_write(tmp_path, text)))

    def test_non_numeric_value_cites_line_and_column(self, tmp_path):
        text = "x1,x2,group\n0.5,oops,a\n"
        with pytest.raises(ValueError, match="line 2: non-numeric value 'oops'"):
            io.load_csv(_labeled_spec(_write(tmp_path, text)))

    def test_unknown_label_cites_line_and_expected_set(self, tmp_path):
        text = "x1,x2,group\n0.5,1.0,d\n"
        with pytest.raises(ValueError, match=r"line 2: unknown label 'd'.*'a', 'b', 'c'"):
            io.load_csv(_labeled_spec(_write(tmp_path, text)))

    def test_bad_one_hot_row_rejected(self, tmp_path):
        text = "x,y0,y1\n1.0,1,1\n"
        spec = io.DatasetSpec(
            path=_write(tmp_path, text), predictors=("x",), response_columns=("y0", "y1")
        )
        with pytest.raises(ValueError, match="line 2: response columns must be one-hot"):
            io.load_csv(spec)

    def test_empty_file_and_header_only(self, tmp_path):
        with pytest.raises(ValueError, match="empty file"):
            io.load_csv(_labeled_spec(_write(tmp_path, "")))
        with pytest.raises(ValueError, match="no data rows"):
            io.load_csv(_labeled_spec(_write(tmp_path, "x1,x2,group\n")))

    def test_digest_tracks_content(self, tmp_path):
        a = io.load_csv(_labeled_spec(_write(tmp_path, LABELED, "a.csv")))
        b = io.load_csv(_labeled_spec(_write(tmp_path, LABELED, "b.csv")))
        c = io.load_csv(_labeled_spec(_write(tmp_path, LABELED + "1,2,a\n", "c.csv")))
        assert a.digest == b.digest != c.digest


class TestRoundTrip:
    def test_written_dataset_reloads_to_identical_fit(self, tmp_path):
        """Simulator output -> CSV -> load_csv -> bit-identical coefficients."""
        config = simulate.SimConfig(n=120, seed=42)
        X, Y = simulate.generate_dataset(config, simulate.substream(42, 0))
        res_direct = estimation.fit(X, Y, alpha=0.3)

        path = tmp_path / "sim.csv"
        header = ["x1", "x2", "group"]
        names = ("a", "b", "c")
        rows = [
            [
                io.format_value(X[i, 1], raw=True),
                io.format_value(X[i, 2], raw=True),
                names[int(np.argmax(Y[i]))],
            ]
            for i in range(config.n)
        ]
        io.write_rows_csv(str(path), header, rows)

        data = io.load_csv(
            io.DatasetSpec(
                path=str(path), predictors=("x1", "x2"), response="group",
                categories=names,
            )
        )
        np.testing.assert_array_equal(data.design, X)
        np.testing.assert_array_equal(data.response, Y)
        res_loaded = estimation.fit(data.design, data.response, alpha=0.3)
        assert res_loaded.beta_hat.tobytes() == res_direct.beta_hat.tobytes()


class TestFormatting:
    def test_six_significant_digits(self):
        assert io.format_value(0.123456789) == "0.123457"
        assert io.format_value(123456.789) == "123457"
        assert io.format_value(-1.5e-7) == "-1.5e-07"

    def test_raw_round_trips_exactly(self):
        x = 0.1 + 0.2
        assert float(io.format_value(x, raw=True)) == x

    def test_write_rows_csv(self, tmp_path):
        path = tmp_path / "t.csv"
        io.write_rows_csv(str(path), ["a", "b"], [[1, "x"], [2.5, "y"]])
        assert path.read_text() == "a,b\n1,x\n2.5,y\n"


class TestConfigFile:
    def test_parses_keys_comments_and_blanks(self, tmp_path):
        text = "# study setup\nn = 300\nq=0.1   # ten percent\n\nalphas = 0,0.4\n"
        path = _write(tmp_path, text, "cfg.txt")
        assert io.parse_config_file(path) == {"n": "300", "q": "0.1", "alphas": "0,0.4"}

    def test_duplicate_key_cites_line(self, tmp_path):
        path = _write(tmp_path, "n = 3\nn = 4\n", "cfg.txt")
        with pytest.raises(ValueError, match="line 2: duplicate key 'n'"):
            io.parse_config_file(path)

    def test_missing_equals_and_empty_value(self, tmp_path):
        with pytest.raises(ValueError, match="line 1: expected 'key = value'"):
            io.parse_config_file(_write(tmp_path, "whatever\n", "c1.txt"))
        with pytest.raises(ValueError, match="line 1: empty key or value"):
            io.parse_config_file(_write(tmp_path, "n =\n", "c2.txt"))


class TestDiabetesHooks:
    def test_loader_without_fixture_explains_how_to_supply_it(self):
        with pytest.raises(FileNotFoundError, match="rrcov"):
            io.load_diabetes()

    def test_loader_reads_supplied_csv(self, tmp_path):
        text = "sspg,insulin,class\n100,350,normal\n208,495,chemical\n300,1468,overt\n"
        data = io.load_diabetes(_write(tmp_path, text, "diabetes.csv"))
        assert data.categories == ("normal", "chemical", "overt")
        np.testing.assert_array_equal(data.response, np.eye(3))

    def test_modified_response_records_last_14_overt_rows_as_normal(self):
        # canonical block order: normal rows, then chemical, then overt
        counts = (76, 36, 33)
        Y = np.repeat(np.eye(3), counts, axis=0)
        out = io.modified_diabetes_response(Y)
        assert out.shape == Y.shape
        np.testing.assert_array_equal(out[:-14], Y[:-14])
        np.testing.assert_array_equal(out[-14:], np.tile(np.eye(3)[0], (14, 1)))
