"""Country attributes and observed lockdown series.

Both inputs are plain UTF-8 CSV files::

    code,name,income,democracy,capital_lat,capital_lon,pop_density,initial_lockdown
    code,d0,d1,...,d30

Records are validated on load; anything out of range raises
:class:`DataError` naming the file line and column.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0

COUNTRY_COLUMNS = (
    "code",
    "name",
    "income",
    "democracy",
    "capital_lat",
    "capital_lon",
    "pop_density",
    "initial_lockdown",
)


class DataError(ValueError):
    """Input file is missing, malformed or violates a data invariant."""


@dataclass(frozen=True)
class CountryRecord:
    id: int
    code: str
    income: float
    democracy: float
    capital_lat: float
    capital_lon: float
    pop_density: float
    initial_lockdown: bool
    name: str = ""


@dataclass(frozen=True)
class ObservationSeries:
    """Observed binary lockdown status, one row per country id, one column per day."""

    matrix: np.ndarray

    @property
    def days(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_countries(self) -> int:
        return self.matrix.shape[0]

    def day(self, t: int) -> np.ndarray:
        return self.matrix[:, t]

    def fractions(self) -> np.ndarray:
        return self.matrix.mean(axis=0)


@dataclass(frozen=True)
class NormalizationContext:
    income_min: float
    income_max: float
    democracy_min: float
    democracy_max: float
    haversine_max: float


def haversine(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) points given in degrees."""
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def haversine_matrix(lat: np.ndarray, lon: np.ndarray) -> np.ndarray:
    """Pairwise great-circle distances (km) for arrays of capital coordinates."""
    lat = np.radians(np.asarray(lat, dtype=float))
    lon = np.radians(np.asarray(lon, dtype=float))
    dlat = lat[None, :] - lat[:, None]
    dlon = lon[None, :] - lon[:, None]
    h = np.sin(dlat / 2) ** 2 + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2) ** 2
    out = 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))
    np.fill_diagonal(out, 0.0)
    return out


def _parse_float(raw: str, line: int, column: str, path: Path) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"{path}:{line}: column '{column}' is not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}:{line}: column '{column}' is not finite: {raw!r}")
    return value


def _parse_flag(raw: str, line: int, column: str, path: Path) -> bool:
    raw = raw.strip()
    if raw not in ("0", "1"):
        raise DataError(f"{path}:{line}: column '{column}' must be 0 or 1, got {raw!r}")
    return raw == "1"


def _open_csv(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [(reader.line_num, row) for row in reader if row and any(c.strip() for c in row)]
    return header, rows


def load_countries(path: str | Path) -> list[CountryRecord]:
    path = Path(path)
    header, rows = _open_csv(path)
    if tuple(header) != COUNTRY_COLUMNS:
        raise DataError(f"{path}:1: expected header {','.join(COUNTRY_COLUMNS)}, got {','.join(header)}")
    if not rows:
        raise DataError(f"{path}: no country rows")

    records: list[CountryRecord] = []
    seen: dict[str, int] = {}
    for idx, (line, row) in enumerate(rows):
        if len(row) != len(COUNTRY_COLUMNS):
            raise DataError(f"{path}:{line}: expected {len(COUNTRY_COLUMNS)} columns, got {len(row)}")
        fields = dict(zip(COUNTRY_COLUMNS, row))
        code = fields["code"].strip()
        if not code:
            raise DataError(f"{path}:{line}: column 'code' is empty")
        if code in seen:
            raise DataError(f"{path}:{line}: duplicate code {code!r} (first seen on line {seen[code]})")
        seen[code] = line

        income = _parse_float(fields["income"], line, "income", path)
        democracy = _parse_float(fields["democracy"], line, "democracy", path)
        lat = _parse_float(fields["capital_lat"], line, "capital_lat", path)
        lon = _parse_float(fields["capital_lon"], line, "capital_lon", path)
        density = _parse_float(fields["pop_density"], line, "pop_density", path)
        for column, value, ok in (
            ("income", income, income >= 0),
            ("democracy", democracy, 0 <= democracy <= 10),
            ("capital_lat", lat, -90 <= lat <= 90),
            ("capital_lon", lon, -180 <= lon <= 180),
            ("pop_density", density, density > 0),
        ):
            if not ok:
                raise DataError(f"{path}:{line}: column '{column}' out of range for {code}: {value}")

        records.append(
            CountryRecord(
                id=idx,
                code=code,
                name=fields["name"].strip(),
                income=income,
                democracy=democracy,
                capital_lat=lat,
                capital_lon=lon,
                pop_density=density,
                initial_lockdown=_parse_flag(fields["initial_lockdown"], line, "initial_lockdown", path),
            )
        )
    return records


def load_observations(
    path: str | Path,
    countries: Sequence[CountryRecord],
    *,
    clamp_monotone: bool = False,
) -> ObservationSeries:
    """Read the observed lockdown matrix and align its rows to ``countries``.

    A 1 -> 0 transition in any row is an error unless ``clamp_monotone`` is
    set, in which case each row is replaced by its running maximum.
    """
    path = Path(path)
    header, rows = _open_csv(path)
    if not header or header[0] != "code":
        raise DataError(f"{path}:1: first column must be 'code'")
    day_columns = header[1:]
    if not day_columns:
        raise DataError(f"{path}:1: no day columns")
    for t, name in enumerate(day_columns):
        if name != f"d{t}":
            raise DataError(f"{path}:1: missing day column d{t} (found {name!r})")

    index = {c.code: c.id for c in countries}
    matrix = np.zeros((len(countries), len(day_columns)), dtype=bool)
    filled: dict[str, int] = {}
    for line, row in rows:
        code = row[0].strip()
        if code not in index:
            raise DataError(f"{path}:{line}: unknown country code {code!r}")
        if code in filled:
            raise DataError(f"{path}:{line}: duplicate code {code!r}")
        if len(row) != len(header):
            raise DataError(f"{path}:{line}: expected {len(header)} columns, got {len(row)}")
        filled[code] = line
        matrix[index[code]] = [_parse_flag(v, line, day_columns[t], path) for t, v in enumerate(row[1:])]

    missing = [c.code for c in countries if c.code not in filled]
    if missing:
        raise DataError(f"{path}: no observations for {', '.join(missing[:5])}" + (" ..." if len(missing) > 5 else ""))

    drops = np.argwhere(matrix[:, :-1] & ~matrix[:, 1:])
    if drops.size:
        if not clamp_monotone:
            i, t = drops[0]
            raise DataError(
                f"{path}:{filled[countries[i].code]}: {countries[i].code} leaves lockdown between "
                f"d{t} and d{t + 1} ({len(drops)} such transitions in total)"
            )
        matrix = np.maximum.accumulate(matrix, axis=1)

    initial = np.array([c.initial_lockdown for c in countries], dtype=bool)
    bad = np.flatnonzero(matrix[:, 0] != initial)
    if bad.size:
        c = countries[bad[0]]
        raise DataError(f"{path}: d0 for {c.code} disagrees with initial_lockdown in the countries file")

    return ObservationSeries(matrix=matrix)


def build_normalization(countries: Sequence[CountryRecord]) -> NormalizationContext:
    if len(countries) < 2:
        raise DataError("normalization needs at least two countries")
    income = np.array([c.income for c in countries])
    democracy = np.array([c.democracy for c in countries])
    if income.max() == income.min():
        raise DataError("all incomes are equal; income range is zero")
    if democracy.max() == democracy.min():
        raise DataError("all democracy scores are equal; democracy range is zero")
    h = haversine_matrix([c.capital_lat for c in countries], [c.capital_lon for c in countries])
    h_max = float(h.max())
    if h_max <= 0:
        raise DataError("all capitals coincide; maximum capital distance is zero")
    return NormalizationContext(
        income_min=float(income.min()),
        income_max=float(income.max()),
        democracy_min=float(democracy.min()),
        democracy_max=float(democracy.max()),
        haversine_max=h_max,
    )


def render_countries(countries: Sequence[CountryRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COUNTRY_COLUMNS)
    for c in countries:
        writer.writerow(
            [
                c.code,
                c.name,
                repr(c.income),
                repr(c.democracy),
                repr(c.capital_lat),
                repr(c.capital_lon),
                repr(c.pop_density),
                int(c.initial_lockdown),
            ]
        )
    return buf.getvalue()


def render_observations(countries: Sequence[CountryRecord], obs: ObservationSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["code", *(f"d{t}" for t in range(obs.days))])
    for c in countries:
        writer.writerow([c.code, *obs.matrix[c.id].astype(int).tolist()])
    return buf.getvalue()


def write_countries(path: str | Path, countries: Sequence[CountryRecord]) -> None:
    Path(path).write_text(render_countries(countries), encoding="utf-8")


def write_observations(path: str | Path, countries: Sequence[CountryRecord], obs: ObservationSeries) -> None:
    Path(path).write_text(render_observations(countries, obs), encoding="utf-8")
