#!/usr/bin/env python3
"""Regenerates the committed test fixtures and reference values.

Reference values come from scipy (statistics) and webvtt-py (caption
timestamps); they are independent of the Rust implementation and are frozen
into JSON so the Rust test suites never need Python at test time.

    python3 fixtures/gen_fixtures.py

The low-resolution fixture video is produced separately with:

    ffmpeg -f lavfi -i "testsrc=size=96x54:rate=5:duration=720" \
        -f lavfi -i "anullsrc=r=8000:cl=mono" -t 720 \
        -c:v libx264 -preset medium -crf 45 -g 10 -pix_fmt yuv420p \
        -c:a aac -b:a 8k -movflags +faststart lecture_12min.mp4
"""

import json
import os

import numpy as np
from scipy import stats
import webvtt

HERE = os.path.dirname(os.path.abspath(__file__))

SUBJECTS = [
    "gradient descent", "the loss surface", "a learning rate", "the hidden layer",
    "each training batch", "the validation split", "our cost function", "the activation",
    "a weight matrix", "the output neuron", "backpropagation", "the chain rule",
]
VERBS = [
    "controls", "shapes", "updates", "measures", "explains", "reveals",
    "changes", "guides", "limits", "connects",
]
OBJECTS = [
    "how quickly the model converges", "what the network eventually learns",
    "which parameters need larger corrections", "where the error actually comes from",
    "why small steps are usually safer", "when training should finally stop",
]


def ten_words(i):
    words = (
        SUBJECTS[i % len(SUBJECTS)].split()
        + [VERBS[(i * 7) % len(VERBS)]]
        + OBJECTS[(i * 5) % len(OBJECTS)].split()
    )
    filler = ["today", "here", "again", "now", "indeed", "clearly", "also"]
    k = 0
    while len(words) < 10:
        words.append(filler[(i + k) % len(filler)])
        k += 1
    return words[:10]


def ts_vtt(ms):
    h, rem = divmod(ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02}:{m:02}:{s:02}.{ms:03}"


def ts_srt(ms):
    return ts_vtt(ms).replace(".", ",")


def write_captions():
    cues = []
    for i in range(144):
        words = ten_words(i)
        text = " ".join(words)
        cues.append((i * 5000, (i + 1) * 5000, text))

    vtt = ["WEBVTT", "Kind: captions", "Language: en", ""]
    for i, (start, end, text) in enumerate(cues):
        payload = text
        # sprinkle markup that the parser has to strip
        if i % 24 == 3:
            payload = f"<v Lecturer>{text}</v>"
        elif i % 24 == 11:
            w = text.split()
            payload = " ".join(w[:4]) + " <b>" + " ".join(w[4:6]) + "</b> " + " ".join(w[6:])
        elif i % 24 == 17:
            w = text.split()
            payload = " ".join(w[:5]) + "\n" + " ".join(w[5:])
        if i % 10 == 0:
            vtt.append(f"cue-{i}")
        vtt.append(f"{ts_vtt(start)} --> {ts_vtt(end)}" + (" align:start" if i % 13 == 0 else ""))
        vtt.append(payload)
        vtt.append("")
        if i == 60:
            vtt.append("NOTE midpoint of the lecture")
            vtt.append("")
    with open(os.path.join(HERE, "lecture_12min.vtt"), "w", encoding="utf-8") as f:
        f.write("\n".join(vtt))

    srt = []
    for i, (start, end, text) in enumerate(cues):
        srt.append(str(i + 1))
        srt.append(f"{ts_srt(start)} --> {ts_srt(end)}")
        srt.append(text)
        srt.append("")
    with open(os.path.join(HERE, "lecture_12min.srt"), "w", encoding="utf-8") as f:
        f.write("\n".join(srt))

    ref = []
    for c in webvtt.read(os.path.join(HERE, "lecture_12min.vtt")):
        ref.append({
            "start_ms": round(c.start_in_seconds * 1000),
            "end_ms": round(c.end_in_seconds * 1000),
            "text": " ".join(c.text.split()),
        })
    srt_ref = []
    for c in webvtt.from_srt(os.path.join(HERE, "lecture_12min.srt")):
        srt_ref.append({
            "start_ms": round(c.start_in_seconds * 1000),
            "end_ms": round(c.end_in_seconds * 1000),
        })
    with open(os.path.join(HERE, "lecture_12min.reference.json"), "w") as f:
        json.dump({"tool": "webvtt-py", "vtt": ref, "srt": srt_ref}, f, indent=1)


def rounded(v):
    return [round(float(x), 3) for x in v]


def write_statistics():
    rng = np.random.RandomState(20250301)
    gens = [
        ("normal", 10, lambda n: rng.normal(5.0, 1.5, n)),
        ("uniform", 15, lambda n: rng.uniform(0, 10, n)),
        ("exponential", 20, lambda n: rng.exponential(2.0, n)),
        ("likert", 25, lambda n: rng.choice([3, 4, 5, 5, 6, 6, 6, 7, 7], n).astype(float)),
        ("normal", 31, lambda n: rng.normal(80.0, 15.0, n)),
        ("lognormal", 36, lambda n: rng.lognormal(0.0, 0.7, n)),
        ("student_t3", 42, lambda n: rng.standard_t(3, n)),
        ("normal", 50, lambda n: rng.normal(-2.0, 0.3, n)),
        ("bimodal", 55, lambda n: np.concatenate([rng.normal(0, 1, n // 2), rng.normal(5, 1, n - n // 2)])),
        ("gamma", 62, lambda n: rng.gamma(2.0, 60.0, n)),
    ]
    sw = []
    for name, n, g in gens:
        v = rounded(g(n))
        r = stats.shapiro(v)
        sw.append({"name": name, "values": v, "w": float(r.statistic), "p": float(r.pvalue)})

    g1 = rounded(rng.normal(446.23, 132.87, 31))
    g2 = rounded(rng.normal(328.77, 104.26, 31))
    t = stats.ttest_ind(g1, g2, equal_var=False)
    welch = {
        "g1": g1, "g2": g2,
        "t": float(t.statistic), "p": float(t.pvalue),
        "df": float(t.df),
    }

    mwu = []
    for name, a, b in [
        ("likert_ties", rng.choice([4, 5, 6, 7], 31).astype(float), rng.choice([5, 6, 7, 7], 31).astype(float)),
        ("continuous", rounded(rng.normal(0, 1, 25)), rounded(rng.normal(0.6, 1, 30))),
        ("counts", rng.poisson(3.5, 31).astype(float), rng.poisson(2.9, 31).astype(float)),
    ]:
        a = [float(x) for x in a]
        b = [float(x) for x in b]
        r = stats.mannwhitneyu(a, b, alternative="two-sided", use_continuity=True, method="asymptotic")
        mwu.append({"name": name, "g1": a, "g2": b, "u1": float(r.statistic), "p": float(r.pvalue)})

    # normality-gate branch fixtures: pick seeds so the reference decides each branch
    heavy1 = [float(x) for x in [7] * 18 + [6] * 9 + [5] * 3 + [2]]
    heavy2 = [float(x) for x in [7] * 12 + [6] * 10 + [5] * 6 + [4] * 2 + [1]]
    seed = 0
    while True:
        r2 = np.random.RandomState(seed)
        n1 = rounded(r2.normal(50, 10, 31))
        n2 = rounded(r2.normal(56, 10, 31))
        if stats.shapiro(n1).pvalue > 0.3 and stats.shapiro(n2).pvalue > 0.3:
            break
        seed += 1
    gate = []
    for name, a, b in [("heavy_ties", heavy1, heavy2), ("near_normal", n1, n2)]:
        pa = float(stats.shapiro(a).pvalue)
        pb = float(stats.shapiro(b).pvalue)
        method = "t_test" if pa > 0.05 and pb > 0.05 else "mann_whitney"
        gate.append({"name": name, "g1": a, "g2": b, "sw_p1": pa, "sw_p2": pb, "method": method})

    with open(os.path.join(HERE, "statistics.reference.json"), "w") as f:
        json.dump({
            "tool": f"scipy {__import__('scipy').__version__}",
            "shapiro_wilk": sw,
            "welch": welch,
            "mann_whitney": mwu,
            "normality_gate": gate,
        }, f, indent=1)


if __name__ == "__main__":
    write_captions()
    write_statistics()
