"""theta -> 0 behaviour of the deformed covariant derivative on spinors."""

import numpy as np

from adsdeform import spinor_dirac as sd
from adsdeform.symsym_p11 import Grid

LAM = lambda p: np.exp(-((p[..., 1] - 0.1) ** 2 + (p[..., 2] + 0.1) ** 2) / (2 * 0.4**2))
PSI = lambda p: np.exp(-np.sum((np.asarray(p) - [0.1, 0.2, -0.1]) ** 2, -1) / (2 * 0.35**2))[..., None] \
    * np.array([1, 0.5j])

if __name__ == "__main__":
    frame = sd.make_frame()
    X = sd.hamiltonian_field(LAM)
    pts = np.array([[0.1, 0.1, 0.1], [0.1, 0.2, -0.3], [0.1, -0.1, 0.2]])
    cl = sd.classical_covariant_derivative(frame, X, PSI, pts)
    quad = Grid(24, 8, -1.5, 1.5)
    prev = None
    for th in (0.2, 0.1, 0.05, 0.025):
        e = np.max(np.abs(sd.deformed_covariant_derivative(frame, LAM, X, PSI, pts, th, quad) - cl)) / np.max(np.abs(cl))
        print(f"theta={th:<6} rel.err={e:.3e}" + (f"  ratio={prev / e:.2f}" if prev else ""), flush=True)
        prev = e
