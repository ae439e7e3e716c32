"""Re-measure the frozen constants in ``torusflow.regression``.

Prints a Python literal block; paste it over the generated section if a
deliberate numerical change moves the values.
"""

import numpy as np

from torusflow.besov import bernstein_ratio, sobolev_equivalence_report
from torusflow.config import PRESETS
from torusflow.fourier_core import PeriodicGrid, random_field
from torusflow.littlewood_paley import PartitionMode, PartitionProfile, build_partition
from torusflow.simulation import simulate

SAFETY = 1.1
FIELDS = 100
GRIDS = [(2, 32), (2, 64), (3, 32)]


def equivalence():
    out = {}
    for dim, n in GRIDS:
        grid = PeriodicGrid(dim, n)
        part = build_partition(grid, PartitionProfile(PartitionMode.ENERGY))
        rng = np.random.default_rng(2024)
        fields = [random_field(grid, rng) for _ in range(FIELDS)]
        for s in (0.5, 1.0, 2.0):
            r = np.array([sobolev_equivalence_report(f, s, part).ratio for f in fields])
            out[(dim, n, s)] = SAFETY * max(r.max(), 1.0 / r.min())
    return out


def bernstein():
    out = {}
    for dim, n in GRIDS:
        grid = PeriodicGrid(dim, n)
        part = build_partition(grid, PartitionProfile(PartitionMode.RECONSTRUCTION))
        rng = np.random.default_rng(2025)
        worst = 0.0
        for _ in range(FIELDS):
            f = random_field(grid, rng)
            worst = max(worst, max(v for _, v in bernstein_ratio(part, f, 1.0)))
        out[(dim, n)] = worst
    return out


def plateau():
    res = simulate(PRESETS["forced-single-mode"])
    return float(res.trajectory["energy"][-1])


def apriori():
    out = {}
    for name in ("taylor-green-2d", "stokes-mode", "forced-single-mode", "random-div-free"):
        res = simulate(PRESETS[name])
        for key, rep in res.bounds["bounds"].items():
            if key.startswith("besov_apriori_"):
                out[(name, key[len("besov_apriori_"):])] = rep["constant"]
    return out


if __name__ == "__main__":
    print("BESOV_SOBOLEV_C = {")
    for k, v in equivalence().items():
        print(f"    {k!r}: {float(v)!r},")
    print("}")
    print("BERNSTEIN_P1 = {")
    for k, v in bernstein().items():
        print(f"    {k!r}: {float(v)!r},")
    print("}")
    print("APRIORI_CONSTANT = {")
    for k, v in apriori().items():
        print(f"    {k!r}: {float(v)!r},")
    print("}")
    print(f"FORCED_PLATEAU_ENERGY = {plateau()!r}")
