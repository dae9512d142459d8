#!/usr/bin/env python3
"""Generate the synthetic Foursquare-style fixture used by the CLI tests.

Writes, under crates/cli/tests/fixtures/synthetic/:
  checkins_nyc.txt          200 valid check-ins + 1 malformed line (tab separated,
                            Foursquare TSMC2014 column order)
  category_embeddings.tsv   one 8-d vector per category name

Deterministic: re-running produces identical bytes.
"""
import datetime as dt
import pathlib
import random

SEED = 20120403
OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/cli/tests/fixtures/synthetic"

CATEGORIES = [
    ("4bf58dd8d48988d1e0931735", "Coffee Shop"),
    ("4bf58dd8d48988d124941735", "Office"),
    ("4c38df4de52ce0d596b336e1", "Parking"),
    ("4bf58dd8d48988d1fd941735", "Subway"),
    ("4bf58dd8d48988d175941735", "Gym / Fitness Center"),
    ("4bf58dd8d48988d1ca941735", "Pizza Place"),
]

# (poi suffix, category index, lat, lng); two pairs sit a block apart.
POIS = [
    ("a01", 0, 40.71280, -74.00600),
    ("a02", 1, 40.70940, -74.01080),
    ("a03", 2, 40.70690, -74.01400),
    ("a04", 3, 40.75270, -73.97720),
    ("a05", 4, 40.73080, -73.99730),
    ("a06", 5, 40.72210, -73.98780),
    ("a07", 0, 40.74170, -74.00480),
    ("a08", 1, 40.75800, -73.98550),
    ("a09", 3, 40.70790, -74.01120),
    ("a10", 5, 40.78130, -73.97400),
    ("a11", 4, 40.76140, -73.97760),
    ("a12", 2, 40.75050, -73.99340),
]
RARE_POI = ("z99", 0, 40.79000, -73.95000)  # visited 3 times, removed by the activity filter

USERS = ["101", "102", "103", "104", "105"]
N_REGULAR = 197


def twitter_time(t: dt.datetime) -> str:
    return t.strftime("%a %b %d %H:%M:%S +0000 %Y")


def main() -> None:
    rng = random.Random(SEED)
    # Every regular POI gets at least 16 visits; the remainder is spread at random.
    visits = [p for p in POIS for _ in range(16)]
    visits += rng.sample(POIS, N_REGULAR - len(visits))
    rng.shuffle(visits)

    # Each user owns a contiguous share of the visit list, played out as sessions.
    shares = [40, 40, 39, 39, 39]
    rows = []
    cursor = 0
    for user, share in zip(USERS, shares):
        t = dt.datetime(2012, 4, 3, 11, 0, tzinfo=dt.timezone.utc) + dt.timedelta(hours=rng.randint(0, 30))
        mine = visits[cursor:cursor + share]
        cursor += share
        i = 0
        while i < len(mine):
            session = rng.randint(2, 5)
            for poi in mine[i:i + session]:
                rows.append((t, user, poi))
                t += dt.timedelta(minutes=rng.randint(20, 240))
            if i == 0 and user in ("102", "104", "105"):
                rows.append((t, user, RARE_POI))
                t += dt.timedelta(minutes=rng.randint(20, 90))
            i += session
            # Mostly overnight gaps; some longer than a day to split trajectories.
            t += dt.timedelta(hours=rng.choice([14, 18, 20, 30, 40, 52]))
    rare_rows = [r for r in rows if r[2] is RARE_POI]
    assert len(rare_rows) == 3, len(rare_rows)
    assert len(rows) == 200, len(rows)

    rows.sort(key=lambda r: (r[0], r[1]))
    lines = []
    for t, user, (suffix, cat, lat, lng) in rows:
        cid, cname = CATEGORIES[cat]
        venue = f"4a{suffix}f964a520{suffix}e31ee3"
        lines.append(f"{user}\t{venue}\t{cid}\t{cname}\t{lat:.6f}\t{lng:.6f}\t-240\t{twitter_time(t)}")
    # One out-of-range latitude; counted as malformed and skipped.
    lines.insert(57, "106\t4abadf964a520badf00d\t4bf58dd8d48988d1e0931735\tCoffee Shop\t91.000000\t-74.000000\t-240\tTue Apr 10 12:00:00 +0000 2012")

    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "checkins_nyc.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    emb_rng = random.Random(SEED + 1)
    emb = []
    for _, name in CATEGORIES:
        vec = [emb_rng.gauss(0.0, 1.0) for _ in range(8)]
        emb.append(name + "\t" + ",".join(f"{x:.6f}" for x in vec))
    (OUT / "category_embeddings.tsv").write_text("\n".join(emb) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
