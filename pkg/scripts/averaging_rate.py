"""Conjugacy defect of the iterate-average chart against n for a rotation conjugated by a Moebius map."""

import argparse
from dataclasses import dataclass

import numpy as np

from holokit.disc import Mobius
from holokit.expr import parse_map
from holokit.linearization import iterate_average_chart


@dataclass
class Config:
    a: float = 0.3
    angle: float = np.pi / 5
    ns: tuple = (4, 8, 16, 32, 64, 128, 256)
    probe_radius: float = 0.1


def conjugated_rotation(a, angle):
    lam = complex(np.exp(1j * angle))
    inner = parse_map(f"({lam.real!r} + {lam.imag!r}*i)*({Mobius(a).to_text()})", 1)
    return parse_map(Mobius(-a).to_text(), 1).compose(inner)


def run(cfg: Config):
    f = conjugated_rotation(cfg.a, cfg.angle)
    print("n,defect,n*defect")
    for n in cfg.ns:
        d = iterate_average_chart(f, [cfg.a], n, probe_radius=cfg.probe_radius).conjugacy_defect
        print(f"{n},{d:.6e},{n * d:.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--angle", type=float, default=Config.angle)
    ap.add_argument("--a", type=float, default=Config.a)
    args = ap.parse_args()
    run(Config(a=args.a, angle=args.angle))
