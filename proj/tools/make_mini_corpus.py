#!/usr/bin/env python3
"""Writes the synthetic mini-corpus used by the end-to-end tests and README.

Output (default data/mini/): corpus/ with one statement per meeting plus a few
press-conference transcripts, prices.csv (weekday index levels), meetings.csv
and config.json. Four themes (inflation, growth, external sector, banking
credit) each get their own vocabulary; the tone of each meeting drifts so the
sentiment regressors vary. Everything is driven by a fixed seed, so rerunning
the script reproduces the files byte for byte.
"""
import argparse
import datetime as dt
import json
import math
import pathlib
import random

MEETINGS = [
    "2015-02-03", "2015-06-02", "2015-09-29", "2016-04-05", "2016-10-04", "2017-02-08",
    "2017-06-07", "2017-10-04", "2018-04-05", "2018-08-01", "2018-12-05", "2019-04-04",
    "2019-08-07", "2019-12-05", "2020-05-22", "2020-10-09", "2021-04-07", "2021-08-06",
    "2021-12-08", "2022-04-08", "2022-08-05", "2022-12-07", "2023-04-06", "2023-08-10",
]

# Each theme has its own nouns and its own tone templates so that the themes
# separate in embedding space while the lexicon still sees the tone phrases.
THEMES = {
    "inflation": {
        "subjects": ["Headline CPI inflation", "Core CPI inflation", "Food inflation", "Fuel inflation",
                     "Household inflation expectations", "Vegetable price inflation", "Retail CPI inflation"],
        "objects": ["the CPI inflation target", "food and fuel inflation", "consumer price inflation",
                    "cereal and pulses prices", "household inflation expectations", "the CPI price outlook"],
        "neutral": ["{s} was {x} per cent in the latest CPI print for food, fuel and core prices.",
                    "{s} is projected at {x} per cent, with CPI price risks around {o} evenly balanced.",
                    "CPI data on {o} and {s_l} showed vegetable, cereal and fuel prices moving apart."],
        "dovish": ["{s} eased as benign vegetable and cereal prices softened {o}.",
                   "Disinflation in {o} pulled {s_l} below target on falling food prices.",
                   "Subdued core CPI prices and benign {o} point to moderation in {s_l}."],
        "hawkish": ["Elevated inflation in {o} kept {s_l} above the CPI target.",
                    "Price pressures from food and fuel kept {s_l} sticky and {o} high.",
                    "Upside risks to inflation from {o} and persistent inflation in core CPI prices remain."],
    },
    "growth": {
        "subjects": ["Real GDP growth", "Private consumption demand", "Investment demand", "Rural demand",
                     "Urban consumption demand", "Manufacturing output", "Factory capacity utilisation"],
        "objects": ["aggregate GDP demand", "the output path of factories", "gross fixed capital formation",
                    "rural and urban consumption", "the investment cycle", "industrial production output"],
        "neutral": ["{s} is estimated at {x} per cent of GDP, driven by {o} and factory output.",
                    "{s} picked up in the quarter as {o} and manufacturing output improved.",
                    "Survey indicators of {o} and {s_l} were mixed across factories and farms."],
        "dovish": ["{s} remained weak and sluggish as {o} slowed.",
                   "A slowdown in {o} and weak {s_l} widened the output gap.",
                   "Downside risks to growth from sluggish {o} call for stimulus to revive growth."],
        "hawkish": ["{s} ran firm as {o} pushed factory output beyond capacity.",
                    "Firm {o} and strong {s_l} point to overheating of GDP demand.",
                    "Overheating in {o} with factory capacity utilisation high calls for a rate hike."],
    },
    "external": {
        "subjects": ["Foreign exchange reserves", "The current account deficit", "Merchandise exports",
                     "Net foreign portfolio flows", "The rupee exchange rate", "Services exports",
                     "External commercial borrowings"],
        "objects": ["the balance of payments", "forex reserves", "rupee exchange rate volatility",
                    "foreign capital inflows", "the merchandise trade deficit", "external debt"],
        "neutral": ["{s} stood at {x} billion dollars, giving a forex buffer against {o}.",
                    "{s} moved in line with {o} and global dollar spillovers.",
                    "Data on {o} and {s_l} were reviewed alongside forex reserves and the rupee."],
        "dovish": ["A surplus of foreign capital inflows eased pressure on {o} and the rupee.",
                   "{s} softened as weak global trade and dollar weakness weighed on {o}.",
                   "Benign {o} and ample forex reserves allow easing of rupee pressure."],
        "hawkish": ["Rupee depreciation and imported price pressures from {o} warrant vigilance.",
                    "{s} widened and forex pressure on {o} calls for tightening.",
                    "Vigilant forex management is needed as {o} and dollar outflows hit {s_l}."],
    },
    "banking": {
        "subjects": ["Bank credit growth", "Non-food bank credit", "Bank credit to small enterprises",
                     "Gross non-performing assets of banks", "Bank deposit growth",
                     "Lending rates of scheduled banks", "Capital adequacy of banks"],
        "objects": ["bank lending", "transmission to bank lending rates", "asset quality of banks",
                    "bank credit flow to the commercial sector", "bank deposit mobilisation", "bank balance sheets"],
        "neutral": ["{s} was {x} per cent year on year, with {o} and bank deposits steady.",
                    "{s} improved as {o} and bank capital strengthened.",
                    "Supervisory data on {o} and {s_l} across scheduled banks were reviewed."],
        "dovish": ["Surplus liquidity in banks and ample liquidity support eased {o}.",
                   "{s} stayed subdued and bank distress weighed on {o}, calling for rate cuts.",
                   "Lower rates on bank loans and accommodative liquidity should revive {o}."],
        "hawkish": ["Firm bank credit growth and high {o} call for tightening of bank liquidity.",
                    "Banks raised lending rates as {o} tightened after the rate hike.",
                    "{s} ran firm and the withdrawal of accommodation from banks tightened {o}."],
    },
}

THEME_ORDER = ["inflation", "growth", "external", "banking"]


def tone_path(n, rng):
    """Meeting-level dovishness in [-1, 1] following a slow cycle plus noise."""
    return [max(-1.0, min(1.0, 0.8 * math.sin(i / 3.0) + rng.gauss(0, 0.3))) for i in range(n)]


def sentence(theme, tone, rng):
    t = THEMES[theme]
    s = rng.choice(t["subjects"])
    o = rng.choice(t["objects"])
    x = f"{rng.uniform(1.5, 8.5):.1f}"
    r = rng.random()
    if r < 0.35 * max(tone, 0.0) + 0.1:
        tpl = rng.choice(t["dovish"])
    elif r < 0.35 * max(tone, 0.0) + 0.1 + 0.35 * max(-tone, 0.0) + 0.1:
        tpl = rng.choice(t["hawkish"])
    else:
        tpl = rng.choice(t["neutral"])
    out = tpl.format(s=s, o=o, x=x, s_l=s[0].lower() + s[1:])
    return out[0].upper() + out[1:]


def statement(date, tone, rng):
    paras = [f"Monetary Policy Statement of {date}. Resolution of the Monetary Policy Committee."]
    for theme in THEME_ORDER:
        k = rng.choice([3, 4, 4])
        paras.append(" ".join(sentence(theme, tone, rng) for _ in range(k)))
    return "\n\n".join(paras) + "\n"


def transcript(date, tone, rng):
    lines = [f"Post-policy press conference, {date}.", ""]
    for theme in rng.sample(THEME_ORDER, 2):
        lines.append(f"Journalist: What is the committee's view on {rng.choice(THEMES[theme]['objects'])}?")
        lines.append("Governor: " + " ".join(sentence(theme, tone, rng) for _ in range(2)))
    lines.append("Moderator: Thank you all for joining.")
    return "\n".join(lines) + "\n"


def prices(meeting_dates, tones, rng):
    """Weekday open/close levels; meetings move the index against dovish tone."""
    start, end = dt.date(2014, 12, 1), dt.date(2024, 3, 29)
    impact = {d: -0.004 * tones[i] for i, d in enumerate(meeting_dates)}
    rows, level, drift_left, drift = [], 27000.0, 0, 0.0
    d = start
    while d <= end:
        if d.weekday() < 5:
            if d in impact:
                drift, drift_left = impact[d], 10
            open_ = level * math.exp(rng.gauss(0, 0.002))
            ret = rng.gauss(0.0003, 0.009) + (drift if drift_left > 0 else 0.0)
            drift_left -= 1
            close = open_ * math.exp(ret)
            rows.append((d.isoformat(), f"{open_:.2f}", f"{close:.2f}"))
            level = close
        d += dt.timedelta(days=1)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1] / "data" / "mini"))
    ap.add_argument("--seed", type=int, default=20240615)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    corpus = out / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    for f in corpus.iterdir():
        f.unlink()

    dates = [dt.date.fromisoformat(d) for d in MEETINGS]
    tones = tone_path(len(dates), rng)
    for i, d in enumerate(dates):
        doc = f"mps_{d.isoformat()}"
        (corpus / f"{doc}.txt").write_text(statement(d.isoformat(), tones[i], rng))
        (corpus / f"{doc}.meta.json").write_text(json.dumps({"doc_type": "statement", "date": d.isoformat(),
                                                             "format": "plain"}) + "\n")
        if i % 3 == 1:
            doc = f"presser_{d.isoformat()}"
            (corpus / f"{doc}.txt").write_text(transcript(d.isoformat(), tones[i], rng))
            (corpus / f"{doc}.meta.json").write_text(json.dumps({"doc_type": "transcript", "date": d.isoformat(),
                                                                 "format": "speaker_tagged"}) + "\n")

    with open(out / "prices.csv", "w") as f:
        f.write("date,open,close\n")
        for r in prices(dates, tones, rng):
            f.write(",".join(r) + "\n")

    with open(out / "meetings.csv", "w") as f:
        f.write("meeting_date,governor,mp_shock\n")
        for i, d in enumerate(dates):
            shock = "NA" if i >= len(dates) - 3 else f"{rng.gauss(0, 0.1):.4f}"
            f.write(f"{d.isoformat()},,{shock}\n")

    config = {
        "corpus_dir": "corpus",
        "prices": "prices.csv",
        "meetings": "meetings.csv",
        "output_dir": "out",
        "seed": 7,
        "study_window": {"start": "2015-01-01", "end": "2023-12-31"},
        "sentences": {"min_words": 4},
        "embedding": {"provider": "hash", "dim": 256},
        "topics": {
            "min_cluster_size": 150,
            "scale_min_cluster_size": True,
            "reference_corpus_size": 10000,
            "target_topics": 8,
            "names": {
                "cpi": "Inflation Dynamics and Price Stability",
                "gdp": "Economic Growth and Demand Dynamics",
                "forex": "Foreign Exchange Reserves Management",
                "bank": "Banking Sector Credit Dynamics",
            },
        },
        "sentiment": {"provider": "lexicon"},
        "regression": {
            "clusters": ["aggregate", "Inflation Dynamics and Price Stability",
                         "Economic Growth and Demand Dynamics", "Foreign Exchange Reserves Management",
                         "Banking Sector Credit Dynamics"],
            "specs": [
                {"name": "baseline", "max_horizon": 30, "regressor": "balance",
                 "bootstrap": {"replications": 500, "level": 90, "kind": "percentile"}},
                {"name": "mp_shock", "max_horizon": 30, "regressor": "balance", "controls": ["mp_shock"],
                 "bootstrap": {"replications": 500, "level": 90, "kind": "bias_corrected"}},
            ],
        },
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
