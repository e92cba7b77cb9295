"""Refinement study for [D, f] = c(df) on the deformed spinor module."""

import argparse

import numpy as np

from adsdeform import spinor_dirac as sd
from adsdeform.symsym_p11 import Grid


def gauss(c, s, v=None):
    c = np.asarray(c, float)
    base = lambda p: np.exp(-np.sum((np.asarray(p) - c) ** 2, -1) / (2 * s * s))
    if v is None:
        return lambda p: base(p) + 0j
    return lambda p: base(p)[..., None] * np.asarray(v, complex)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--theta", type=float, default=1.0)
    ap.add_argument("--cells", type=int, nargs="+", default=[4, 6, 8, 12])
    args = ap.parse_args()
    frame = sd.make_frame()
    f = gauss((0.1, 0.1, -0.2), 0.35)
    psi = gauss((0.1, 0.2, -0.1), 0.35, (1, 0.5j))
    pts = np.array([[0.1, 0.0, 0.0], [0.1, 0.2, -0.3], [0.0, -0.1, 0.2]])
    for n in args.cells:
        r = sd.dirac_commutator_defect(frame, f, psi, pts, args.theta, Grid(n, 4, -2, 2))
        print(f"nodes/axis={4 * n:3d}  defect={r['defect']:.3e}  sup|[D,f]psi|={r['sup_commutator']:.3e}", flush=True)


if __name__ == "__main__":
    main()
