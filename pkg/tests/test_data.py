import numpy as np
import pytest

from adcg.bench.data import IngestError, load_frames, load_io, load_ratings


def test_load_frames_single_2x2(tmp_path):
    p = tmp_path / "frames.csv"
    p.write_text("frame,c0,c1\n0,1.0,2.0\n0,3.0,4.0\n")
    stack = load_frames(p)
    assert (stack.grid_w, stack.grid_h) == (2, 2)
    assert len(stack) == 1
    np.testing.assert_array_equal(stack.images[0], [1.0, 2.0, 3.0, 4.0])
    assert stack.truths is None


def test_load_frames_with_truth(tmp_path):
    f = tmp_path / "frames.csv"
    f.write_text("frame,c0,c1\n0,1,2\n0,3,4\n1,0,0\n1,0,0\n")
    t = tmp_path / "truth.csv"
    t.write_text("frame,x_nm,y_nm,intensity\n0,10.0,20.0,1.5\n1,30.0,40.0,0.5\n")
    stack = load_frames(f, t)
    assert len(stack) == 2
    np.testing.assert_array_equal(stack.truths[0], [[10.0, 20.0, 1.5]])


def test_load_frames_ragged_row_rejected(tmp_path):
    p = tmp_path / "frames.csv"
    p.write_text("frame,c0,c1\n0,1.0,2.0\n0,3.0\n")
    with pytest.raises(IngestError, match=":3"):
        load_frames(p)


def test_load_frames_inconsistent_height_rejected(tmp_path):
    p = tmp_path / "frames.csv"
    p.write_text("frame,c0\n0,1.0\n0,2.0\n1,3.0\n")
    with pytest.raises(IngestError, match="frame 1"):
        load_frames(p)


def test_load_ratings_round_trip(tmp_path):
    p = tmp_path / "train.csv"
    p.write_text("user,item,rating\n0,0,3.5\n1,2,4.0\n")
    data = load_ratings(p, (3, 3))
    assert data.train.shape == (2, 3)
    assert data.train_mean == pytest.approx(3.75)
    assert data.test.shape == (0, 3)


def test_load_ratings_duplicate_rejected_with_line(tmp_path):
    p = tmp_path / "train.csv"
    p.write_text("user,item,rating\n0,0,3.5\n0,0,4.0\n")
    with pytest.raises(IngestError, match=":3"):
        load_ratings(p, (3, 3))


def test_load_ratings_out_of_range_rejected(tmp_path):
    p = tmp_path / "train.csv"
    p.write_text("user,item,rating\n5,0,3.5\n")
    with pytest.raises(IngestError, match="outside"):
        load_ratings(p, (3, 3))


def test_load_io_and_split(tmp_path):
    p = tmp_path / "io.csv"
    p.write_text("u,y\n" + "\n".join(f"{i},{2 * i}" for i in range(10)) + "\n")
    seq = load_io(p, train_split=7)
    assert seq.train_split == 7
    np.testing.assert_array_equal(seq.y, 2.0 * seq.u)
    default = load_io(p)
    assert default.train_split == 5


def test_load_io_unequal_columns_rejected(tmp_path):
    p = tmp_path / "io.csv"
    p.write_text("u,y\n1.0,2.0\n3.0\n")
    with pytest.raises(IngestError, match=":3"):
        load_io(p)


def test_load_io_bad_split_rejected(tmp_path):
    p = tmp_path / "io.csv"
    p.write_text("u,y\n1.0,2.0\n3.0,4.0\n")
    with pytest.raises(IngestError):
        load_io(p, train_split=2)


def test_missing_file_reported():
    with pytest.raises(IngestError, match="cannot open"):
        load_io("/nonexistent/io.csv")
