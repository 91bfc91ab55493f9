"""Generate the checked-in synthetic stand-in cohort.

Produces tests/data/synthetic_cohort.arff: 470 rows over the thoracic
surgery schema with the same class balance (70 T / 400 F) and a moderate
class signal. The file is a deterministic stand-in for protocol-level
tests when the real clinical file is not available; its values are
sampled, not clinical data.
"""

from pathlib import Path

import numpy as np

SCHEMA = [
    ("DGN", ("DGN3", "DGN2", "DGN4", "DGN6", "DGN5", "DGN8", "DGN1")),
    ("PRE4", None),
    ("PRE5", None),
    ("PRE6", ("PRZ2", "PRZ1", "PRZ0")),
    ("PRE7", ("T", "F")),
    ("PRE8", ("T", "F")),
    ("PRE9", ("T", "F")),
    ("PRE10", ("T", "F")),
    ("PRE11", ("T", "F")),
    ("PRE14", ("OC11", "OC14", "OC12", "OC13")),
    ("PRE17", ("T", "F")),
    ("PRE19", ("T", "F")),
    ("PRE25", ("T", "F")),
    ("PRE30", ("T", "F")),
    ("PRE32", ("T", "F")),
    ("AGE", None),
    ("Risk1Yr", ("T", "F")),
]

# class-conditional sampling parameters: (died within a year, survived)
P = {
    "DGN": {"T": [0.42, 0.10, 0.30, 0.06, 0.08, 0.03, 0.01],
            "F": [0.58, 0.12, 0.18, 0.04, 0.05, 0.02, 0.01]},
    "PRE6": {"T": [0.55, 0.35, 0.10], "F": [0.70, 0.25, 0.05]},
    "PRE7": {"T": 0.12, "F": 0.06},
    "PRE8": {"T": 0.22, "F": 0.14},
    "PRE9": {"T": 0.16, "F": 0.06},
    "PRE10": {"T": 0.75, "F": 0.66},
    "PRE11": {"T": 0.20, "F": 0.16},
    "PRE14": {"T": [0.30, 0.28, 0.32, 0.10], "F": [0.18, 0.62, 0.17, 0.03]},
    "PRE17": {"T": 0.18, "F": 0.07},
    "PRE19": {"T": 0.03, "F": 0.02},
    "PRE25": {"T": 0.03, "F": 0.02},
    "PRE30": {"T": 0.90, "F": 0.80},
    "PRE32": {"T": 0.02, "F": 0.02},
}


def make_row(rng, label):
    row = {}
    for name in ("DGN", "PRE6", "PRE14"):
        values = dict(SCHEMA)[name]
        row[name] = values[rng.choice(len(values), p=P[name][label])]
    for name in ("PRE7", "PRE8", "PRE9", "PRE10", "PRE11",
                 "PRE17", "PRE19", "PRE25", "PRE30", "PRE32"):
        row[name] = "T" if rng.random() < P[name][label] else "F"
    # lung function: the died group skews lower on both volumes
    fvc_mu = 2.9 if label == "T" else 3.4
    fvc = float(np.clip(rng.normal(fvc_mu, 0.75), 1.44, 6.30))
    ratio = float(np.clip(rng.normal(0.78 if label == "T" else 0.82, 0.07), 0.45, 0.98))
    row["PRE4"] = f"{fvc:.2f}"
    row["PRE5"] = f"{fvc * ratio:.2f}"
    age_mu = 63.0 if label == "T" else 61.0
    row["AGE"] = str(int(np.clip(round(rng.normal(age_mu, 8.5)), 21, 87)))
    row["Risk1Yr"] = label
    return ",".join(row[name] for name, _ in SCHEMA)


def main():
    rng = np.random.default_rng(20240816)
    rows = [make_row(rng, "T") for _ in range(70)]
    rows += [make_row(rng, "F") for _ in range(400)]
    order = rng.permutation(len(rows))
    lines = ["% synthetic stand-in cohort: sampled values, not clinical data",
             "@relation synthetic-thoracic-cohort"]
    for name, values in SCHEMA:
        if values is None:
            lines.append(f"@attribute {name} numeric")
        else:
            lines.append(f"@attribute {name} {{{','.join(values)}}}")
    lines.append("@data")
    lines += [rows[i] for i in order]
    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "synthetic_cohort.arff"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
