"""Tests for the tabular data model and CSV loading."""

import math

import pytest

from src.exceptions import DataError, DuplicateColumnError, RaggedRowError, UnknownColumnError
from src.tabular import ColumnKind, Frame, column_stats, load_csv, null_fraction, parse_number


@pytest.mark.unit
class TestParseNumber:
    """Tests for numeric cell parsing."""

    def test_plain_numbers(self):
        """Test that plain numbers parse."""
        assert parse_number("12") == 12.0
        assert parse_number("-0.5") == -0.5
        assert parse_number("1e3") == 1000.0

    def test_text_is_not_a_number(self):
        """Test that text does not parse as a number."""
        assert parse_number("x") is None
        assert parse_number("Yes") is None

    def test_underscores_are_rejected(self):
        """Python accepts 1_000 but CSV cells should not."""
        assert parse_number("1_000") is None

    def test_non_finite_parses(self):
        """Test that non-finite spellings parse to non-finite floats."""
        assert math.isnan(parse_number("nan"))
        assert parse_number("inf") == math.inf


@pytest.mark.unit
class TestFrame:
    """Tests for Frame construction and accessors."""

    def test_shape_and_columns(self, customer_frame):
        """Test frame shape and column names."""
        assert customer_frame.n_rows == 5
        assert customer_frame.n_cols == 5
        assert customer_frame.column("gender") == ("M", "F", "M", None, "F")
        assert customer_frame.kind("age") is ColumnKind.NUMERIC
        assert "religion" in customer_frame
        assert "missing" not in customer_frame

    def test_duplicate_column_rejected(self):
        """Test that duplicate column names are rejected."""
        with pytest.raises(DuplicateColumnError) as exc_info:
            Frame(["a", "a"], [ColumnKind.NUMERIC, ColumnKind.NUMERIC], [])
        assert exc_info.value.column == "a"

    def test_ragged_row_rejected(self):
        """Test that rows of the wrong length are rejected."""
        with pytest.raises(RaggedRowError) as exc_info:
            Frame(["a", "b"], [ColumnKind.NUMERIC, ColumnKind.NUMERIC], [(1.0, 2.0), (3.0,)])
        assert exc_info.value.row_index == 1

    def test_cell_kind_enforced(self):
        """Test that cells must match their column kind."""
        with pytest.raises(DataError):
            Frame(["a"], [ColumnKind.NUMERIC], [("text",)])
        with pytest.raises(DataError):
            Frame(["a"], [ColumnKind.CATEGORICAL], [(1.0,)])
        with pytest.raises(DataError):
            Frame(["a"], [ColumnKind.NUMERIC], [(math.inf,)])

    def test_unknown_column(self, customer_frame):
        """Test that an unknown column raises UnknownColumnError."""
        with pytest.raises(UnknownColumnError) as exc_info:
            customer_frame.column("income")
        assert "income" in str(exc_info.value)

    def test_take_preserves_order(self, customer_frame):
        """Test that take keeps the requested row order."""
        subset = customer_frame.take([4, 0])
        assert subset.column("cust_id") == ("C5", "C1")
        assert subset.kinds == customer_frame.kinds

    def test_drop_missing(self, customer_frame):
        """Test that drop_missing removes rows missing the column."""
        kept = customer_frame.drop_missing("age")
        assert kept.n_rows == 4
        assert None not in kept.column("age")

    def test_to_csv_reloads_identically(self, customer_frame, tmp_path):
        """Test that a written frame loads back equal."""
        path = customer_frame.to_csv(tmp_path / "frame.csv")
        reloaded = load_csv(path, kind_overrides={"cust_id": ColumnKind.CATEGORICAL})
        assert reloaded == customer_frame

    def test_to_csv_keeps_exact_floats(self, tmp_path):
        """Test that floats survive a CSV round trip bit-exactly."""
        value = 0.1 + 0.2
        frame = Frame(["x"], [ColumnKind.NUMERIC], [(value,), (None,)])
        reloaded = load_csv(frame.to_csv(tmp_path / "x.csv"))
        assert reloaded.column("x") == (value, None)


@pytest.mark.unit
class TestLoadCsv:
    """Tests for load_csv."""

    def test_three_rows_two_columns(self, csv_writer):
        """Test a small CSV with three rows and two columns."""
        frame = load_csv(csv_writer("a,b\n1,x\n2,y\n3,z\n"))
        assert frame.n_rows == 3
        assert frame.n_cols == 2
        assert frame.kinds == (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL)

    def test_null_token_becomes_missing(self, csv_writer):
        """Test that the NULL token becomes a missing cell."""
        frame = load_csv(csv_writer("Gender,age\nM,30\nNULL,40\n , null\n"))
        assert frame.column("Gender") == ("M", None, None)
        assert frame.column("age") == (30.0, 40.0, None)

    def test_custom_null_tokens(self, csv_writer):
        """Test that custom null tokens are honored."""
        frame = load_csv(csv_writer("a\nNA\n1\n"), null_tokens={"NA"})
        assert frame.column("a") == (None, 1.0)

    def test_mixed_column_is_categorical(self, csv_writer):
        """Test that a column mixing text and numbers is categorical."""
        frame = load_csv(csv_writer("v\n1\n2\nx\n"))
        assert frame.kind("v") is ColumnKind.CATEGORICAL
        assert frame.column("v") == ("1", "2", "x")

    def test_non_finite_numbers_become_missing(self, csv_writer):
        """Test that non-finite numbers load as missing."""
        frame = load_csv(csv_writer("v\n1\nnan\ninf\n"))
        assert frame.kind("v") is ColumnKind.NUMERIC
        assert frame.column("v") == (1.0, None, None)

    def test_all_missing_column_is_numeric(self, csv_writer):
        """Test that an all-missing column infers as numeric."""
        frame = load_csv(csv_writer("a,b\n1,NULL\n2,\n"))
        assert frame.kind("b") is ColumnKind.NUMERIC

    def test_kind_override(self, csv_writer):
        """Test that kind overrides win over inference."""
        frame = load_csv(csv_writer("code\n1\n2\n"), kind_overrides={"code": ColumnKind.CATEGORICAL})
        assert frame.column("code") == ("1", "2")

    def test_numeric_override_on_text_fails(self, csv_writer):
        """Test that a numeric override on text cells fails."""
        with pytest.raises(DataError):
            load_csv(csv_writer("code\n1\nx\n"), kind_overrides={"code": ColumnKind.NUMERIC})

    def test_quoted_cells(self, csv_writer):
        """Test that quoted cells keep commas and doubled quotes."""
        frame = load_csv(csv_writer('name,n\n"Doe, Jane",1\n"say ""hi""",2\n'))
        assert frame.column("name") == ("Doe, Jane", 'say "hi"')

    def test_ragged_row_reports_index(self, csv_writer):
        """Test that a ragged row reports its index."""
        with pytest.raises(RaggedRowError) as exc_info:
            load_csv(csv_writer("a,b\n1,2\n3\n"))
        assert exc_info.value.row_index == 1

    def test_duplicate_header(self, csv_writer):
        """Test that a duplicate header is rejected."""
        with pytest.raises(DuplicateColumnError):
            load_csv(csv_writer("a,a\n1,2\n"))

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises DataError."""
        with pytest.raises(DataError):
            load_csv(tmp_path / "absent.csv")

    def test_empty_file(self, csv_writer):
        """Test that an empty file raises DataError."""
        with pytest.raises(DataError):
            load_csv(csv_writer(""))

    def test_deterministic(self, csv_writer):
        """Test that loading one file twice gives equal frames."""
        path = csv_writer("a,b\n1,x\nNULL,y\n")
        assert load_csv(path) == load_csv(path)


@pytest.mark.unit
class TestNullFraction:
    """Tests for null_fraction."""

    def test_ratio(self):
        """Test the null fraction of a partly missing column."""
        rows = [(None,)] * 15000 + [(1.0,)] * 35000
        frame = Frame(["x"], [ColumnKind.NUMERIC], rows)
        assert null_fraction(frame, "x") == 0.30

    def test_none_and_all_missing(self):
        """Test null fractions of zero and one."""
        frame = Frame(["a", "b"], [ColumnKind.NUMERIC, ColumnKind.NUMERIC], [(1.0, None), (2.0, None)])
        assert null_fraction(frame, "a") == 0.0
        assert null_fraction(frame, "b") == 1.0

    def test_unknown_column(self, customer_frame):
        """Test that an unknown column raises UnknownColumnError."""
        with pytest.raises(UnknownColumnError):
            null_fraction(customer_frame, "nope")

    def test_empty_frame(self):
        """Test that an empty frame is rejected."""
        with pytest.raises(DataError):
            null_fraction(Frame(["a"], [ColumnKind.NUMERIC], []), "a")


@pytest.mark.unit
class TestColumnStats:
    """Tests for column_stats."""

    def test_numeric_mean(self):
        """Test the mean of a numeric column."""
        frame = Frame(["x"], [ColumnKind.NUMERIC], [(1.0,), (2.0,), (3.0,), (None,)])
        assert column_stats(frame, "x") == 2.0

    def test_categorical_mode(self):
        """Test the mode of a categorical column."""
        frame = Frame(["g"], [ColumnKind.CATEGORICAL], [("M",), ("M",), ("F",), (None,)])
        assert column_stats(frame, "g") == "M"

    def test_mode_tie_is_lexicographic(self):
        """Test that mode ties resolve lexicographically."""
        frame = Frame(["g"], [ColumnKind.CATEGORICAL], [("M",), ("F",)])
        assert column_stats(frame, "g") == "F"

    def test_all_missing_fails(self):
        """Test that an all-missing column has no statistic."""
        frame = Frame(["g"], [ColumnKind.CATEGORICAL], [(None,), (None,)])
        with pytest.raises(DataError):
            column_stats(frame, "g")
