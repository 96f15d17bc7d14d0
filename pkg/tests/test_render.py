import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sasoca import render
from sasoca.ca import make_lattice, simulate
from sasoca.fsm import LAYOUT_1D, Fsm, LogicGate


class TestPgm:
    def test_header_and_polarity(self):
        data = render.pgm_bytes(np.array([[1, 0, 1]]))
        assert data == b"P5\n3 1\n255\n" + bytes([0, 255, 0])

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 1)))
    def test_round_trip(self, img):
        assert np.array_equal(render.read_pgm(render.pgm_bytes(img)), img)

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            render.pgm_bytes(np.zeros(4))
        with pytest.raises(ValueError):
            render.read_pgm(b"P2\n1 1\n255\n\x00")


class TestAscii:
    def test_1d(self):
        assert render.ascii_rows(np.array([[1, 0], [0, 1]])) == "#.\n.#\n"

    def test_2d_headers(self):
        lat = make_lattice((3, 3), 1)
        traj = np.array([[1, 0, 0, 0, 0, 0, 0, 0, 1], [0] * 9])
        assert render.ascii_trajectory(traj, lat) == "t=0\n#..\n...\n..#\nt=1\n...\n...\n...\n"

    def test_3d_slices(self):
        lat = make_lattice((3, 3, 3), 1)
        config = np.zeros(27, dtype=np.uint8)
        config[1] = 1  # (0, 0, 1): last index is z
        text = render.ascii_trajectory(config[None], lat)
        assert text == "t=0\nz=0\n...\n...\n...\nz=1\n#..\n...\n...\nz=2\n...\n...\n...\n"


def test_all_zero_rule_gives_white_stripe(tmp_path):
    lat = make_lattice((35,), 2)
    ic = np.random.default_rng(0).integers(0, 2, 35, dtype=np.uint8)
    _, traj = simulate(Fsm(LAYOUT_1D), lat, ic, record=True)
    (p,) = render.write_trajectory(traj[0], lat, tmp_path)
    img = render.read_pgm(p.read_bytes())
    assert img.shape == (71, 35)
    assert np.array_equal(img[0], ic) and not img[1:].any()
    assert set(p.read_bytes()[len(b"P5\n35 71\n255\n") + 35:]) == {255}


def test_2d_files_and_sheet(tmp_path):
    lat = make_lattice((3, 3), 1)
    traj = np.zeros((12, 9), dtype=np.uint8)
    traj[:, 4] = 1
    paths = render.write_trajectory(traj, lat, tmp_path)
    names = [p.name for p in paths]
    assert names[0] == "step_00.pgm" and names[-2] == "step_11.pgm" and names[-1] == "sheet.pgm"
    sheet = render.read_pgm((tmp_path / "sheet.pgm").read_bytes())
    assert sheet.shape == (2 * 4 - 1, 10 * 4 - 1)
    assert sheet.sum() == 12


def test_3d_slice_files(tmp_path):
    lat = make_lattice((3, 3, 5), 1)
    traj = np.zeros((2, 45), dtype=np.uint8)
    names = {p.name for p in render.write_trajectory(traj, lat, tmp_path)}
    assert names == {f"step_{t}_z{z}.pgm" for t in range(2) for z in range(5)}


def test_single_gate_trajectory_image(tmp_path):
    # NOT of self: the stripe alternates
    f = Fsm(LAYOUT_1D, (LogicGate((2,), (5,), (1, 0)),))
    lat = make_lattice((35,), 2)
    _, traj = simulate(f, lat, np.zeros(35, dtype=np.uint8), steps=4, record=True)
    render.write_trajectory(traj[0], lat, tmp_path)
    img = render.read_pgm((tmp_path / "spacetime.pgm").read_bytes())
    assert [row.all() for row in img] == [False, True, False, True, False]
    assert [row.any() for row in img] == [False, True, False, True, False]
