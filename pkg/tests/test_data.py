import numpy as np
import pytest

from bincp.core import Dataset, Label, Sample, ScorePair
from bincp.data import (
    DataFormatError,
    SyntheticSpec,
    demo_test_path,
    figure1_path,
    generate_synthetic,
    load_dataset,
    write_dataset,
)

from conftest import FIGURE1_NEG, FIGURE1_POS


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestBundledFixtures:
    def test_figure_one_fixture_contents(self):
        data = load_dataset(figure1_path(), positive_class="B")
        assert len(data) == 21
        assert data.count(Label.POSITIVE) == 11
        assert data.count(Label.NEGATIVE) == 10
        assert data.feature_dim is None
        assert sorted(
            s.scores.s_pos for s in data if s.true_label is Label.POSITIVE
        ) == sorted(FIGURE1_POS)
        assert sorted(
            s.scores.s_neg for s in data if s.true_label is Label.NEGATIVE
        ) == sorted(FIGURE1_NEG)

    def test_positive_class_mapping_is_symmetric(self):
        flipped = load_dataset(figure1_path(), positive_class="A")
        assert flipped.count(Label.POSITIVE) == 10
        assert flipped.count(Label.NEGATIVE) == 11

    def test_demo_test_fixture_contents(self):
        data = load_dataset(demo_test_path(), positive_class="B")
        assert [s.id for s in data] == ["t1", "t2", "t3"]
        assert [s.true_label for s in data] == [
            Label.POSITIVE,
            Label.POSITIVE,
            Label.NEGATIVE,
        ]


class TestLoadDataset:
    def test_feature_file(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1,x2\na,yes,1.0,2.5\nb,no,-1.0,0.0\n")
        data = load_dataset(path, positive_class="yes")
        assert data.feature_dim == 2
        assert data[0].features == (1.0, 2.5)
        assert data[0].true_label is Label.POSITIVE
        assert data[1].true_label is Label.NEGATIVE
        assert data[0].scores is None

    def test_score_file(self, tmp_path):
        path = write_csv(tmp_path, "id,label,s_pos,s_neg\na,yes,0.9,0.1\n")
        data = load_dataset(path, positive_class="yes")
        assert data[0].scores == ScorePair(0.9, 0.1, probability=True)
        assert data.feature_dim is None

    def test_combined_file(self, tmp_path):
        path = write_csv(
            tmp_path, "id,label,x1,s_pos,s_neg\na,yes,3.0,0.25,0.75\n"
        )
        data = load_dataset(path, positive_class="yes", schema="both")
        assert data[0].features == (3.0,)
        assert data[0].scores == ScorePair(0.25, 0.75, probability=True)

    def test_empty_label_means_unknown(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1\na,,1.0\nb,yes,2.0\n")
        data = load_dataset(path, positive_class="yes")
        assert data[0].true_label is None
        assert not data.fully_labelled()

    def test_header_must_start_with_id_and_label(self, tmp_path):
        path = write_csv(tmp_path, "name,label,x1\na,yes,1.0\n")
        with pytest.raises(DataFormatError, match="header"):
            load_dataset(path, positive_class="yes")

    def test_feature_columns_must_be_numbered_in_order(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x2,x1\na,yes,1.0,2.0\n")
        with pytest.raises(DataFormatError, match="x1..xm"):
            load_dataset(path, positive_class="yes")

    def test_data_columns_are_required(self, tmp_path):
        path = write_csv(tmp_path, "id,label\na,yes\n")
        with pytest.raises(DataFormatError, match="feature or score"):
            load_dataset(path, positive_class="yes")

    def test_row_width_errors_carry_the_line_number(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1\na,yes,1.0\nb,no\n")
        with pytest.raises(DataFormatError, match=":3:"):
            load_dataset(path, positive_class="yes")

    def test_bad_numbers_name_line_and_column(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1\na,yes,1.0\nb,no,abc\n")
        with pytest.raises(DataFormatError, match=r":3:.*x1"):
            load_dataset(path, positive_class="yes")

    def test_nan_features_rejected(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1\na,yes,nan\n")
        with pytest.raises(DataFormatError, match="NaN"):
            load_dataset(path, positive_class="yes")

    def test_score_rows_must_be_complementary_probabilities(self, tmp_path):
        path = write_csv(tmp_path, "id,label,s_pos,s_neg\na,yes,0.9,0.3\n")
        with pytest.raises(DataFormatError, match=":2:"):
            load_dataset(path, positive_class="yes")

    def test_duplicate_ids_rejected(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1\na,yes,1.0\na,no,2.0\n")
        with pytest.raises(DataFormatError):
            load_dataset(path, positive_class="yes")

    def test_empty_and_headerless_files_rejected(self, tmp_path):
        empty = write_csv(tmp_path, "", name="empty.csv")
        with pytest.raises(DataFormatError, match="empty"):
            load_dataset(empty, positive_class="yes")
        header_only = write_csv(tmp_path, "id,label,x1\n", name="header.csv")
        with pytest.raises(DataFormatError, match="no data rows"):
            load_dataset(header_only, positive_class="yes")

    def test_at_most_two_classes(self, tmp_path):
        path = write_csv(
            tmp_path, "id,label,x1\na,red,1.0\nb,green,2.0\nc,blue,3.0\n"
        )
        with pytest.raises(DataFormatError, match="two classes"):
            load_dataset(path, positive_class="red")

    def test_positive_class_must_appear_when_two_exist(self, tmp_path):
        path = write_csv(tmp_path, "id,label,x1\na,red,1.0\nb,green,2.0\n")
        with pytest.raises(DataFormatError, match="positive class"):
            load_dataset(path, positive_class="blue")

    def test_schema_mismatches_are_rejected(self, tmp_path):
        scored = write_csv(tmp_path, "id,label,s_pos,s_neg\na,yes,0.9,0.1\n")
        featured = write_csv(
            tmp_path, "id,label,x1\na,yes,1.0\n", name="feat.csv"
        )
        with pytest.raises(DataFormatError):
            load_dataset(scored, positive_class="yes", schema="features")
        with pytest.raises(DataFormatError):
            load_dataset(featured, positive_class="yes", schema="scores")
        with pytest.raises(DataFormatError):
            load_dataset(featured, positive_class="yes", schema="both")
        with pytest.raises(DataFormatError):
            load_dataset(scored, positive_class="yes", schema="nonsense")

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_dataset(tmp_path / "absent.csv", positive_class="yes")


class TestWriteDataset:
    def test_feature_round_trip_is_exact(self, tmp_path):
        spec = SyntheticSpec(n_per_class=7, dim=3, separation=1.5, noise=0.8, seed=4)
        data = generate_synthetic(spec)
        path = tmp_path / "out.csv"
        write_dataset(data, path)
        back = load_dataset(path, positive_class="positive")
        assert [s.id for s in back] == [s.id for s in data]
        assert [s.true_label for s in back] == [s.true_label for s in data]
        assert [s.features for s in back] == [s.features for s in data]

    def test_score_round_trip_is_exact(self, tmp_path):
        data = load_dataset(figure1_path(), positive_class="B")
        path = tmp_path / "scores.csv"
        write_dataset(data, path)
        back = load_dataset(path, positive_class="positive")
        assert [s.scores for s in back] == [s.scores for s in data]
        assert [s.true_label for s in back] == [s.true_label for s in data]

    def test_unknown_labels_round_trip_as_empty(self, tmp_path):
        data = Dataset((
            Sample(id="a", features=(1.0,), true_label=Label.POSITIVE),
            Sample(id="b", features=(2.0,)),
        ))
        path = tmp_path / "mixed.csv"
        write_dataset(data, path)
        assert "b," in path.read_text(encoding="utf-8")
        back = load_dataset(path, positive_class="positive")
        assert back[1].true_label is None

    def test_partially_scored_dataset_is_rejected(self, tmp_path):
        data = Dataset((
            Sample(id="a", features=(1.0,), scores=ScorePair(0.5, 0.5, probability=True)),
            Sample(id="b", features=(2.0,)),
        ))
        with pytest.raises(ValueError, match="some samples"):
            write_dataset(data, tmp_path / "bad.csv")

    def test_output_uses_unix_newlines(self, tmp_path):
        data = Dataset((Sample(id="a", features=(1.0,), true_label=Label.POSITIVE),))
        path = tmp_path / "nl.csv"
        write_dataset(data, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")


class TestSyntheticGenerator:
    def test_same_spec_reproduces_the_dataset(self):
        spec = SyntheticSpec(n_per_class=20, dim=2, seed=9)
        first = generate_synthetic(spec)
        second = generate_synthetic(spec)
        assert [s.features for s in first] == [s.features for s in second]
        assert [s.id for s in first] == [s.id for s in second]

    def test_different_seeds_differ(self):
        a = generate_synthetic(SyntheticSpec(n_per_class=5, seed=1))
        b = generate_synthetic(SyntheticSpec(n_per_class=5, seed=2))
        assert [s.features for s in a] != [s.features for s in b]

    def test_layout_and_ids(self):
        data = generate_synthetic(SyntheticSpec(n_per_class=10, dim=3, seed=0))
        assert len(data) == 20
        assert data.feature_dim == 3
        assert data.count(Label.NEGATIVE) == 10
        assert [s.id for s in data][:2] == ["n01", "n02"]
        assert [s.id for s in data][10:12] == ["p01", "p02"]
        assert data.fully_labelled()

    def test_separation_shifts_the_positive_mean(self):
        spec = SyntheticSpec(n_per_class=4000, dim=2, separation=3.0, noise=1.0, seed=3)
        data = generate_synthetic(spec)
        pos = np.array([s.features for s in data if s.true_label is Label.POSITIVE])
        neg = np.array([s.features for s in data if s.true_label is Label.NEGATIVE])
        gap = pos[:, 0].mean() - neg[:, 0].mean()
        assert abs(gap - 3.0) < 0.15
        assert abs(pos[:, 1].mean() - neg[:, 1].mean()) < 0.15

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(n_per_class=0)
        with pytest.raises(ValueError):
            SyntheticSpec(n_per_class=1, dim=0)
        with pytest.raises(ValueError):
            SyntheticSpec(n_per_class=1, separation=-1.0)
        with pytest.raises(ValueError):
            SyntheticSpec(n_per_class=1, noise=0.0)
