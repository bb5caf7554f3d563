#!/usr/bin/env python3
# Copyright 2026 The AFL Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Converts the raw UCI Adult files (adult.data, adult.test) into headered
CSVs plus one vocabulary file per categorical column.

Usage: prepare_adult.py RAW_DIR OUT_DIR
"""

import csv
import os
import sys

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]
CATEGORICAL = [
    "workclass", "education", "marital_status", "occupation",
    "relationship", "race", "sex", "native_country",
]


def convert(src, dst):
    rows = []
    with open(src) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [x.strip() for x in line.split(",")]
            # adult.test labels carry a trailing period.
            fields[-1] = fields[-1].rstrip(".")
            rows.append(fields)
    with open(dst, "w", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(rows)
    return rows


def main():
    raw, out = sys.argv[1], sys.argv[2]
    train = convert(os.path.join(raw, "adult.data"),
                    os.path.join(out, "adult_train.csv"))
    convert(os.path.join(raw, "adult.test"), os.path.join(out, "adult_test.csv"))
    for col in CATEGORICAL:
        idx = COLUMNS.index(col)
        vocab = []
        for row in train:
            if row[idx] not in vocab:
                vocab.append(row[idx])
        with open(os.path.join(out, "vocab_%s.txt" % col), "w") as f:
            f.write("\n".join(vocab) + "\n")


if __name__ == "__main__":
    main()
