#!/usr/bin/env python3
"""Regenerate data/country_points.csv from the GeoNames cities dataset.

Each country gets its capital plus up to four of its most populous other
cities, which spreads the representative points across the territory.
Territories without any populated place in the dataset use a fixed
hand-entered point.

    pip install geonamescache
    python3 tools/data/gen_country_points.py data/region_map.csv > data/country_points.csv
"""
import csv
import sys

import geonamescache

EXTRA_POINTS = 4

# Uninhabited or sparsely listed territories.
FALLBACK = {
    "AQ": [(-77.85, 166.67), (-64.77, -64.05), (-90.0, 0.0)],
    "BV": [(-54.43, 3.38)],
    "HM": [(-53.10, 73.51)],
    "UM": [(19.28, 166.65), (28.21, -177.38), (0.81, -176.62)],
    "TF": [(-49.35, 70.22), (-46.41, 51.86), (-37.83, 77.56)],
    "IO": [(-7.31, 72.41)],
    "GS": [(-54.28, -36.51)],
    "PN": [(-25.07, -130.10)],
    "TK": [(-9.20, -171.85)],
    "EH": [(27.15, -13.20), (23.68, -15.96)],
}


def main():
    with open(sys.argv[1], newline="") as f:
        wanted = [row["country"] for row in csv.DictReader(f)]

    gc = geonamescache.GeonamesCache()
    countries = gc.get_countries()
    by_country = {}
    for city in gc.get_cities().values():
        by_country.setdefault(city["countrycode"], []).append(city)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["country", "lat", "lon"])
    for cc in wanted:
        cities = sorted(by_country.get(cc, []), key=lambda c: -c["population"])
        capital = countries.get(cc, {}).get("capital", "")
        points = []
        for city in cities:
            if city["name"] == capital:
                points.append(city)
                break
        for city in cities:
            if len(points) > EXTRA_POINTS:
                break
            if city not in points:
                points.append(city)
        coords = [(c["latitude"], c["longitude"]) for c in points]
        if cc in FALLBACK:
            coords = coords + [p for p in FALLBACK[cc] if p not in coords]
        if not coords:
            sys.exit(f"no representative point for {cc}")
        for lat, lon in coords:
            out.writerow([cc, f"{lat:.4f}", f"{lon:.4f}"])


if __name__ == "__main__":
    main()
