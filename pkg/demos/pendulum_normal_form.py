"""Normal form of the pendulum from the explicit generator.

The pendulum p^2/2 + (1 - cos Q) becomes a perturbed oscillator after the
scale Q = sqrt(eps) q.  Its normal form is a function of the action alone,
so we print it as a table of coefficients of (q^2 + p^2)^k.
"""
import time

from katodeprit import direct_transform, explicit_generator, from_birkhoff, pendulum
from katodeprit.cli import action_table

N = 8
H = pendulum(N)

# the perturbation terms, back in the pq frame
for k, h in enumerate(H.terms_pq()[:3], start=1):
    print(f"H{k} =", h)

t0 = time.perf_counter()
G = explicit_generator(H, N)
Ht = direct_transform(G, H, N)
print(f"\norder {N} in {time.perf_counter() - t0:.3f} s")

# the generator has no secular part, so it is odd in p
print("\nG0 =", from_birkhoff(G[0]))
print("G1 =", from_birkhoff(G[1]))

print("\nnormalized Hamiltonian, c * eps^n * (q^2 + p^2)^k")
for row in action_table(Ht):
    print(f"  n={row['eps']}  k={row['power']}  c={row['coeff']}")
