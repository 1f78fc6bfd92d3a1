"""Fixed point sets of the annulus inversion and of (1/x, xy) on {1/2<|x|<2, |xy^2|<1}."""

import argparse
from dataclasses import dataclass

import numpy as np

from holokit.domains import parse_domain
from holokit.expr import parse_map
from holokit.fixed_points import fix_components, fix_scan


@dataclass
class Case:
    domain: str
    map: str


CASES = (
    Case("annulus(2)", "1/z"),
    Case("domain{1/2<|x|<2; |x*y^2|<1}", "1/x, x*y"),
)


def describe(case: Case, grid_count: int, seed: int):
    d = parse_domain(case.domain)
    f = parse_map(case.map, d.dim)
    scan = fix_scan(f, d, grid_count=grid_count, seed=seed)
    print(f"{case.map}  on  {case.domain}: {len(scan)} fixed points")
    for comp in fix_components(scan, f, d):
        P = np.array(comp["points"])
        spread = np.ptp(P, axis=0) if len(P) > 1 else np.zeros(d.dim)
        print(f"  dim {comp['dim']}: {len(P)} points, first {np.round(P[0], 6)}, coordinate spread {np.round(np.abs(spread), 3)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    for case in CASES:
        describe(case, a.grid, a.seed)
