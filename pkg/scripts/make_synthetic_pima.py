#!/usr/bin/env python3
"""Regenerate the bundled synthetic diabetes dataset.

Produces a deterministic 768-row, 9-column CSV whose feature marginals mimic
the classic Pima diabetes table (eight diagnostic measurements plus a binary
outcome).  Labels are drawn from a logistic model over the standardized
features, so a correctly implemented logistic-regression pipeline should
recover test accuracy comfortably above chance.  The real dataset can be used
instead at runtime via the PIMA_DATA environment variable or the --data flag.
"""

import numpy as np

N_ROWS = 768
SEED = 20240807
OUT = "src/bowls/data/pima_synthetic.csv"

HEADER = "pregnancies,glucose,blood_pressure,skin_thickness,insulin,bmi,pedigree,age,label"


def main() -> None:
    rng = np.random.Generator(np.random.PCG64(SEED))

    pregnancies = np.clip(rng.poisson(3.6, N_ROWS), 0, 17)
    glucose = np.clip(rng.normal(121.0, 31.0, N_ROWS), 44, 199).round()
    pressure = np.clip(rng.normal(70.0, 14.0, N_ROWS), 24, 122).round()
    skin = np.clip(rng.normal(26.0, 11.0, N_ROWS), 0, 99).round()
    insulin = np.clip(rng.lognormal(4.2, 0.9, N_ROWS), 0, 846).round()
    bmi = np.clip(rng.normal(32.2, 7.2, N_ROWS), 18.2, 67.1).round(1)
    pedigree = np.clip(rng.lognormal(-0.95, 0.55, N_ROWS), 0.078, 2.42).round(3)
    age = np.clip(rng.lognormal(3.5, 0.33, N_ROWS), 21, 81).round()

    features = np.column_stack(
        [pregnancies, glucose, pressure, skin, insulin, bmi, pedigree, age]
    ).astype(float)
    standardized = (features - features.mean(axis=0)) / features.std(axis=0)

    weights = np.array([0.30, 1.15, 0.10, 0.15, 0.20, 0.70, 0.30, 0.45])
    logits = standardized @ weights - 0.80
    labels = (rng.uniform(size=N_ROWS) < 1.0 / (1.0 + np.exp(-logits))).astype(int)

    with open(OUT, "w", encoding="utf-8") as handle:
        handle.write(HEADER + "\n")
        for row, label in zip(features, labels):
            cells = [
                f"{int(row[0])}",
                f"{int(row[1])}",
                f"{int(row[2])}",
                f"{int(row[3])}",
                f"{int(row[4])}",
                f"{row[5]:.1f}",
                f"{row[6]:.3f}",
                f"{int(row[7])}",
                str(label),
            ]
            handle.write(",".join(cells) + "\n")
    print(f"wrote {OUT}: {N_ROWS} rows, positive rate {labels.mean():.3f}")


if __name__ == "__main__":
    main()
