"""Flow on the collision manifold: a closed orbit that wraps around the sphere
(C=40) and an orbit that leaves through a binary collision (C=20)."""

from manev_isosceles import P0, coords
from manev_isosceles.dynamics import integrate
from manev_isosceles.integrator import Event

theta0 = 0.3
ret = Event("return", lambda s, y: y[1] - theta0, direction=+1)
for C in (40.0, 20.0):
    w0 = coords.solve_w(P0, 0.0, 0.0, theta0, -1.0, C)
    tr = integrate(P0, "manifold", [0.0, theta0, w0], -1.0, C, 100.0, events=[ret])
    _, th, w = tr.final
    print(f"C={C:g}: start (theta, w) = ({theta0}, {w0:.6f})")
    print(f"  ended with {tr.termination.value} at sigma={tr.sigma[-1]:.6f}, "
          f"(theta, w) = ({th:.6f}, {w:.6f}), max residual {tr.max_relative_residual:.1e}")

# spectra of the P and E equilibria at C=0
from manev_isosceles import manifold  # noqa: E402

for eq in manifold.equilibria(P0, 0.0)[:-1]:
    rep = manifold.restricted_spectrum(P0, eq, -1.0, 0.0)
    spec = ", ".join(f"{z.real:+.5f}{z.imag:+.5f}j" for z in rep.spectrum_numeric)
    print(f"{eq.kind.value:<4} spectrum [{spec}]  (unstable, stable, centre) = {rep.manifold_dims}")
