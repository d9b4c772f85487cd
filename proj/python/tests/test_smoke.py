import json
import math

import pytest

import klee


def test_ball_volumes():
    assert klee.unit_ball_volume(2) == pytest.approx(math.pi)
    assert klee.sphere_measure(2) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("dim", [3, 4, 5, 6])
def test_ball_has_constant_maximal_sections(dim):
    body = klee.ball(dim)
    rep = klee.verify(body, directions=40)
    assert rep["spread"] <= 1e-10
    assert rep["M_K"]["mean"] == pytest.approx(klee.unit_ball_volume(dim - 1), rel=1e-12)
    assert rep["verdicts"]["overall"] == "PASS"
    assert rep["note"] == "symmetric reference"


def test_profile_and_sections():
    body = klee.ball(4)
    f, f1, _ = body.profile(0.6)
    assert f == pytest.approx(0.8)
    assert f1 == pytest.approx(-0.75)
    t, vol = body.max_section(0.3, -1)
    assert abs(t) < 1e-9
    assert vol == pytest.approx(klee.unit_ball_volume(3))
    assert body.section_volume(0.0, 1, 0.6) == pytest.approx(klee.unit_ball_volume(3) * 0.8**3)


def test_build_zero_amplitude_is_ball():
    body = klee.build(dim=5, h_scale=0.0)
    assert body.dim == 5
    assert not body.perturbed
    assert json.loads(body.report_json())["kind"] == "ball"


def test_json_roundtrip(tmp_path):
    body = klee.ball(3).corrupted(0.2, 0.6, 1e-3)
    path = str(tmp_path / "b.json")
    body.save(path)
    back = klee.load(path)
    for xi in (-0.5, 0.3, 0.45):
        assert back.profile(xi) == body.profile(xi)
    assert klee.from_json(body.to_json()).profile(0.4) == body.profile(0.4)


def test_negative_control_fails():
    rep = klee.verify(klee.ball(4).corrupted(0.2, 0.6, 1e-3), directions=60)
    assert rep["spread"] > 1e-5
    assert rep["verdicts"]["overall"] == "FAIL"


def test_plot_tables():
    t = klee.plot_tables(klee.ball(3), directions=10, samples=21)
    rows = t["profile"].strip().splitlines()
    assert rows[0] == "xi,f,f1,f2"
    assert len(rows) == 22
    for line in rows[1:]:
        xi, f = map(float, line.split(",")[:2])
        assert f == pytest.approx(math.sqrt(max(0.0, 1 - xi * xi)), abs=1e-14)
    assert set(t) == {"profile", "chords", "radial", "mk"}


def test_errors_are_raised():
    with pytest.raises(klee.KleeError):
        klee.from_json('{"format": "other"}')
    with pytest.raises(klee.KleeError):
        klee.load("/nonexistent/body.json")
