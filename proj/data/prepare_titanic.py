#!/usr/bin/env python3
"""Build data/titanic.csv from data/TitanicSurvival.csv.

The source file is the TitanicSurvival table from the R carData package
(1309 passengers of the 1912 Titanic; the same passenger list as the
classic titanic3 dataset). Rows with missing age are dropped, leaving
1046 passengers. Columns written:

    died    1 if the passenger did not survive, else 0
    pclass  passenger class: 1st, 2nd, 3rd
    age     age in years (infants carry fractional ages)
    male    1 if sex == male, else 0

Usage: python3 prepare_titanic.py [src] [dst]
"""
import csv
import sys


def main() -> None:
    src = sys.argv[1] if len(sys.argv) > 1 else "TitanicSurvival.csv"
    dst = sys.argv[2] if len(sys.argv) > 2 else "titanic.csv"
    kept = 0
    with open(src, newline="") as fin, open(dst, "w", newline="") as fout:
        reader = csv.DictReader(fin)
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(["died", "pclass", "age", "male"])
        for row in reader:
            if row["age"] == "":
                continue
            died = 1 if row["survived"] == "no" else 0
            male = 1 if row["sex"] == "male" else 0
            writer.writerow([died, row["passengerClass"], row["age"], male])
            kept += 1
    print(f"wrote {dst}: {kept} rows")


if __name__ == "__main__":
    main()
