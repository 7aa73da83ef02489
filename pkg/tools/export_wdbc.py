"""Write the WDBC data bundled with scikit-learn in the UCI ``wdbc.data`` layout.

The UCI file is not shipped with scikit-learn's copy, and the scikit-learn copy
has no patient ids, so ids are the 1-based row numbers.  Feature order
(10 means, 10 standard errors, 10 worst values) is identical to UCI.

    python tools/export_wdbc.py data/wdbc.data
"""
import csv
import sys

from sklearn.datasets import load_breast_cancer


def main(path):
    bunch = load_breast_cancer()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for i, (row, target) in enumerate(zip(bunch.data, bunch.target), 1):
            diagnosis = "M" if bunch.target_names[target] == "malignant" else "B"
            writer.writerow([str(i), diagnosis] + ["%.10g" % v for v in row])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "wdbc.data")
