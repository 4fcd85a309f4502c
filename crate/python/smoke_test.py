"""Smoke test for the qgf extension module. Run after `pip install crates/python`."""

import math
from pathlib import Path

import qgf

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data"
HA_EV = 27.211386245988


def close(a, b, tol):
    assert abs(a - b) < tol, f"{a} vs {b}"


def main():
    r = qgf.vqe("builtin:hubbard_dimer,t=1,U=2", "none")
    close(r["energy_ha"], -1.0, 1e-12)

    r = qgf.vqe(str(DATA / "lih_sto3g.fcidump"), "lih_u1")
    assert r["converged"]
    close(r["energy_ev"], -214.3323, 0.05)

    p = qgf.Problem("builtin:hubbard_dimer,t=1,U=2", "fci")
    assert (p.n_modes, p.n_electrons) == (4, 2)
    close(p.e_gs_ev / HA_EV, 1 - math.sqrt(5), 1e-10)
    gm = p.gm_energy()
    close(gm["e_gm_ha"], 1 - math.sqrt(5), 1e-7)
    a = p.gm_energy(n_meas=2000, seed=3)
    b = p.gm_energy(n_meas=2000, seed=3)
    assert a == b
    assert a != p.gm_energy(n_meas=2000, seed=3, repetition=1)
    t = p.transitions_dict(n_meas=100, seed=4)
    assert t["provenance"]["seed"] == 4

    # one doubly degenerate hole pole 0.5 Ha below mu
    single = qgf.Problem("builtin:single_level")
    delta = 0.05
    omega = [-20.0 + 0.5 * k for k in range(60)]
    for w, v in zip(omega, single.spectrum(omega, delta_au=delta)):
        x = w / HA_EV + 0.5
        close(v, 2 * delta / math.pi / (x * x + delta * delta), 1e-9)

    for bad, exc in [
        (lambda: qgf.Problem("builtin:nope"), ValueError),
        (lambda: qgf.Problem("builtin:hubbard_dimer", max_sector_dim=2), MemoryError),
        (lambda: qgf.Problem("/no/such.fcidump"), OSError),
        (lambda: single.spectrum([0.0], delta_au=0.0), ValueError),
    ]:
        try:
            bad()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")

    print("qgf smoke test passed")


if __name__ == "__main__":
    main()
