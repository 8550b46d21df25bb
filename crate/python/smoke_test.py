"""Smoke test for the chiral_decoherence extension module."""
import math

import chiral_decoherence as cd

closed, quad = cd.bose_integral(2)
assert abs(closed - math.pi**2 / 6) < 1e-12 and abs(quad - closed) < 1e-10

p = cd.prefactor(1.0)
assert abs(p / 6.979e-18 - 1) < 1e-3, p
assert abs(cd.prefactor(2.0) / p - 256) < 1e-9

c = cd.isotropic_average([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
assert all(isinstance(x, complex) for x in c)
assert abs(c[0] - 1) < 1e-12 and abs(c[1]) < 1e-12 and abs(c[2]) < 1e-12

mol = cd.Molecule.toy()
print(mol, mol.wavenumber)
b = mol.coefficients(1.0)
gamma = mol.elastic_rate(1.0)
assert 1e-97 < gamma < 1e-93, gamma
assert abs(mol.elastic_rate(2.0) / gamma - 256) < 1e-6

left = mol.mirrored()
# the mirror image flips every B and leaves the rate alone
assert abs(left.coefficients(1.0)[0][0] + b[0][0]) <= 1e-12 * abs(b[0][0])
assert abs(left.elastic_rate(1.0) - gamma) <= 1e-12 * gamma

for name, paper, quadrature, ratio in mol.discrepancy(1.0):
    print(f"{name}: paper {paper:.4e} quadrature {quadrature:.4e} ratio {ratio}")

rows = mol.evolve(1.0, decay_times=3.0, steps=300, population_transfer=False, record_every=30)
t, r11, r22, re12, im12, purity, cl, cr = rows[-1]
assert abs(r11 + r22 - 1) < 1e-12
assert abs(math.hypot(re12, im12) - 0.5 * math.exp(-3.0)) < 1e-6
assert purity < rows[0][5]

try:
    cd.prefactor(-1.0)
except ValueError as e:
    print("rejected:", e)
else:
    raise AssertionError("negative temperature accepted")

print("ok")
