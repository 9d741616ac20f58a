import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covpol.country_data import (
    COUNTRY_COLUMNS,
    DataError,
    build_normalization,
    haversine,
    haversine_matrix,
    load_countries,
    load_observations,
    write_countries,
    write_observations,
    ObservationSeries,
)
from covpol.synthetic import generate_synthetic

from conftest import random_countries
from oracles import great_circle_km

HEADER = ",".join(COUNTRY_COLUMNS)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_164_rows(tmp_path):
    countries, obs = generate_synthetic(164, seed=3)
    path = tmp_path / "c.csv"
    write_countries(path, countries)
    loaded = load_countries(path)
    assert len(loaded) == 164
    assert [c.id for c in loaded] == list(range(164))
    assert loaded == countries


def test_single_row(tmp_path):
    p = _write(tmp_path, "c.csv", HEADER + "\nAAA,Alpha,1000,5,10,20,50,0\n")
    (rec,) = load_countries(p)
    assert rec.id == 0 and rec.code == "AAA" and rec.name == "Alpha"
    assert rec.initial_lockdown is False


def test_democracy_out_of_range_names_line_and_column(tmp_path):
    p = _write(tmp_path, "c.csv", HEADER + "\nAAA,A,1000,5,10,20,50,0\nBBB,B,1000,11.2,10,20,50,0\n")
    with pytest.raises(DataError, match=r":3: column 'democracy'"):
        load_countries(p)


@pytest.mark.parametrize(
    "row, column",
    [
        ("AAA,A,x,5,10,20,50,0", "income"),
        ("AAA,A,1000,5,91,20,50,0", "capital_lat"),
        ("AAA,A,1000,5,10,181,50,0", "capital_lon"),
        ("AAA,A,1000,5,10,20,0,0", "pop_density"),
        ("AAA,A,1000,5,10,20,50,2", "initial_lockdown"),
        ("AAA,A,-1,5,10,20,50,0", "income"),
    ],
)
def test_field_errors(tmp_path, row, column):
    p = _write(tmp_path, "c.csv", HEADER + "\n" + row + "\n")
    with pytest.raises(DataError, match=column):
        load_countries(p)


def test_duplicate_code_and_bad_header(tmp_path):
    p = _write(tmp_path, "c.csv", HEADER + "\nAAA,A,1,5,1,1,5,0\nAAA,B,2,6,2,2,5,0\n")
    with pytest.raises(DataError, match="duplicate"):
        load_countries(p)
    p = _write(tmp_path, "d.csv", "code,income\nAAA,1\n")
    with pytest.raises(DataError, match="header"):
        load_countries(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_countries(tmp_path / "nope.csv")


def test_load_is_idempotent(tmp_path):
    countries = random_countries(12, seed=1)
    path = tmp_path / "c.csv"
    write_countries(path, countries)
    assert load_countries(path) == load_countries(path)


def _obs_file(tmp_path, countries, matrix):
    path = tmp_path / "o.csv"
    write_observations(path, countries, ObservationSeries(np.asarray(matrix, dtype=bool)))
    return path


def test_observations_accept_march_like_matrix(tmp_path):
    countries, obs = generate_synthetic(164, seed=20200301)
    cpath = tmp_path / "c.csv"
    write_countries(cpath, countries)
    loaded = load_observations(_obs_file(tmp_path, countries, obs.matrix), load_countries(cpath))
    assert loaded.matrix.shape == (164, 31)
    np.testing.assert_array_equal(loaded.matrix, obs.matrix)
    f = loaded.fractions()
    assert abs(f[0] - 0.08) < 0.03
    assert f[-1] > 0.80


def test_all_zero_observations(tmp_path):
    countries = random_countries(6, seed=2, locked=[])
    obs = load_observations(_obs_file(tmp_path, countries, np.zeros((6, 31))), countries)
    assert np.all(obs.fractions() == 0)


def test_drop_out_of_lockdown_is_rejected(tmp_path):
    countries = random_countries(4, seed=2, locked=[])
    m = np.zeros((4, 31), dtype=bool)
    m[2, 5:9] = True
    path = _obs_file(tmp_path, countries, m)
    with pytest.raises(DataError, match=r"C002 leaves lockdown between d8 and d9"):
        load_observations(path, countries)
    clamped = load_observations(path, countries, clamp_monotone=True)
    assert clamped.matrix[2, 5:].all() and not clamped.matrix[2, :5].any()


def test_observation_header_and_codes(tmp_path):
    countries = random_countries(2, seed=2, locked=[])
    p = _write(tmp_path, "o.csv", "code,d0,d2\nC000,0,0\nC001,0,0\n")
    with pytest.raises(DataError, match="d1"):
        load_observations(p, countries)
    p = _write(tmp_path, "o.csv", "code,d0\nC000,0\nZZZ,0\n")
    with pytest.raises(DataError, match="unknown country"):
        load_observations(p, countries)
    p = _write(tmp_path, "o.csv", "code,d0\nC000,1\nC001,0\n")
    with pytest.raises(DataError, match="initial_lockdown"):
        load_observations(p, countries)


def test_normalization_two_countries():
    a, b = random_countries(2, seed=4)
    a = type(a)(**{**a.__dict__, "income": 1000.0})
    b = type(b)(**{**b.__dict__, "income": 5000.0})
    norm = build_normalization([a, b])
    assert norm.income_min == 1000 and norm.income_max == 5000


def test_normalization_degenerate():
    a, b = random_countries(2, seed=4)
    same_capital = type(b)(**{**b.__dict__, "capital_lat": a.capital_lat, "capital_lon": a.capital_lon})
    with pytest.raises(DataError, match="capital"):
        build_normalization([a, same_capital])
    same_income = type(b)(**{**b.__dict__, "income": a.income})
    with pytest.raises(DataError, match="income"):
        build_normalization([a, same_income])
    same_dem = type(b)(**{**b.__dict__, "democracy": a.democracy})
    with pytest.raises(DataError, match="democracy"):
        build_normalization([a, same_dem])


def test_haversine_max_is_brute_force_max():
    countries, _ = generate_synthetic(164, seed=11)
    norm = build_normalization(countries)
    brute = max(
        great_circle_km(a.capital_lat, a.capital_lon, b.capital_lat, b.capital_lon)
        for k, a in enumerate(countries)
        for b in countries[k + 1 :]
    )
    assert norm.haversine_max == pytest.approx(brute, rel=1e-9)


def test_haversine_examples():
    assert haversine((12.5, -40.0), (12.5, -40.0)) == 0.0
    assert haversine((0.0, 0.0), (0.0, 180.0)) == pytest.approx(math.pi * 6371.0, abs=0.1)
    assert math.pi * 6371.0 == pytest.approx(20015.1, abs=0.1)


coords = st.tuples(st.floats(-90, 90), st.floats(-180, 180))


@settings(max_examples=200, deadline=None)
@given(coords, coords)
def test_haversine_matches_vector_oracle(a, b):
    assert haversine(a, b) == pytest.approx(great_circle_km(*a, *b), abs=1e-6)
    assert haversine(a, b) == pytest.approx(haversine(b, a), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(coords, min_size=2, max_size=8))
def test_haversine_matrix_agrees(points):
    lat, lon = zip(*points)
    m = haversine_matrix(lat, lon)
    for i, a in enumerate(points):
        for j, b in enumerate(points):
            assert m[i, j] == pytest.approx(haversine(a, b), abs=1e-6)
