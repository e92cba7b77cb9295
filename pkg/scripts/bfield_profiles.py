"""Residual of the B-field equation for the tanh profile and the derived cosh^2 profile."""

from adsdeform.config import RunConfig
from adsdeform.suites import bfield_scan

if __name__ == "__main__":
    cfg = RunConfig(bfield_samples=13)
    tanh, derived = bfield_scan(cfg, "tanh"), bfield_scan(cfg, "derived")
    print(f"{'a':>6} {'tanh res':>10} {'derived res':>12}")
    for (a, _, r1), (_, _, r2) in zip(tanh, derived):
        print(f"{a:6.2f} {r1:10.3e} {r2:12.3e}")
