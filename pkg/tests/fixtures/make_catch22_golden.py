"""Regenerate the catch22 golden fixtures.

Requires the ``pycatch22`` reference package and its source tree (for the
published test series). Not needed to run the test suite; the outputs are
committed next to this script.

    python make_catch22_golden.py /path/to/catch22/testData

The five published series come from the catch22 repository test data
(GPL-3.0). The short series are generated here with a fixed seed.
"""

import csv
import json
import sys
from pathlib import Path

import numpy as np
import pycatch22

PUBLISHED = {
    "basic_test": "basic/test.txt",
    "ar_p2_L500": "simulated/testAR_L500_p2_nm_1_5.txt",
    "tent_map_L300": "simulated/testMP_tent_L300_A1.96.txt",
    "hyperchaos_bigcone": "simulated/testHY_bigcone_rf.txt",
    "polynomial_noise_L1000": "simulated/testSY_plnm_r_3_1000_3.txt",
}

HERE = Path(__file__).parent


def build_series(test_data: Path) -> dict:
    series = {}
    for key, rel in PUBLISHED.items():
        series[key] = np.loadtxt(test_data / rel).ravel().tolist()
    rng = np.random.default_rng(20240611)
    t = np.arange(75)
    series["sine_period25_L75"] = np.sin(2 * np.pi * t / 25).tolist()
    series["noisy_sine_L75"] = (np.sin(2 * np.pi * t / 9) + 0.3 * rng.normal(size=75)).tolist()
    series["gaussian_L75"] = rng.normal(size=75).tolist()
    series["random_walk_L75"] = np.cumsum(rng.normal(size=75)).tolist()
    series["constant_L75"] = [0.5] * 75
    return series


def main(test_data):
    series = build_series(Path(test_data))
    with open(HERE / "catch22_series.json", "w") as fh:
        json.dump(series, fh, indent=0)
    with open(HERE / "catch22_golden.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["feature_name", "input_fixture_id", "expected_value"])
        for key, y in series.items():
            res = pycatch22.catch22_all(y)
            for name, value in zip(res["names"], res["values"]):
                w.writerow([name, key, repr(float(value))])


if __name__ == "__main__":
    main(sys.argv[1])
