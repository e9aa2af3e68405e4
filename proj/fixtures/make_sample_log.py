#!/usr/bin/env python3
"""Regenerates sample_access.log: random walks over kupikniga.gspn, written as
an IIS-style W3C log with a few malformed lines mixed in.

Every rate symbol fires at least once, so `navgspn estimate` works on it.
"""
import pathlib
import random
from datetime import datetime, timedelta

HERE = pathlib.Path(__file__).resolve().parent

moves = {}  # place -> [(target, symbol)]
for line in (HERE / "kupikniga.gspn").read_text().splitlines():
    if not line.startswith("timed"):
        continue
    tok = dict(t.split("=", 1) for t in line.split()[2:])
    moves.setdefault(tok["in"], []).append((tok["out"], tok["rate"]))

pages = {}
for line in (HERE / "pages.tsv").read_text().splitlines():
    if line.startswith("#") or not line.strip():
        continue
    page, _, place = line.split("\t")
    pages.setdefault(place, []).append(page)


def generate(seed):
    rng = random.Random(seed)
    fired = set()
    rows = []
    for u in range(12):
        user = f"user{u:02d}"
        t = datetime(2015, 3, 2) + timedelta(seconds=rng.randrange(86400))
        for _ in range(rng.randint(1, 3)):
            place = "A"
            while True:
                rows.append((t, user, rng.choice(pages[place])))
                target, sym = rng.choice(moves[place])
                fired.add(sym)
                if target == "E" or len(rows) > 400:
                    break
                place = target
                t += timedelta(seconds=rng.randint(5, 900))
            t += timedelta(seconds=1800 + rng.randrange(3 * 86400))
    return rows, fired


symbols = {s for ms in moves.values() for _, s in ms}
seed = 7
while True:
    rows, fired = generate(seed)
    if fired == symbols and len(rows) <= 120:
        break
    seed += 1

rng = random.Random(seed)
out = [
    "#Software: Microsoft Internet Information Services 8.5",
    "#Version: 1.0",
    "#Date: 2015-03-02 00:00:00",
    "#Fields: date time s-ip cs-method cs-uri-stem cs-uri-query s-port cs-username c-ip sc-status time-taken",
]
for t, user, page in sorted(rows):
    query = f"id={rng.randrange(100)}" if rng.random() < 0.2 else "-"
    out.append(
        f"{t:%Y-%m-%d %H:%M:%S} 10.0.0.5 GET /Pages/{page}.aspx {query} 443 {user} "
        f"192.168.1.{rng.randrange(1, 255)} 200 {rng.randrange(5, 900)}"
    )
# malformed: truncated line, impossible date, missing user
out.insert(20, "2015-03-03 11:02:51 10.0.0.5 GET /Pages/News.aspx")
out.insert(40, "2015-13-40 10:00:00 10.0.0.5 GET /Pages/Help.aspx - 443 user04 192.168.1.9 200 12")
out.insert(60, "2015-03-04 09:12:00 10.0.0.5 GET /Pages/Default.aspx - 443 - 192.168.1.17 200 40")
(HERE / "sample_access.log").write_text("\n".join(out) + "\n")
print(f"seed {seed}: {len(rows)} page views")
