"""Three normalizations of the Toda lattice and where they part ways.

The Toda 2D lattice is a 1:1 resonant system, so its normal form depends on
how the free secular part of the generator is fixed.  The explicit generator
fixes P_H G = 0; the classical Deprit triangle fixes P G_n = 0 order by order.
The two normal forms agree for a while and then split.
"""
import time

from katodeprit import (TermCounter, deprit_classical, direct_transform, explicit_generator,
                        from_birkhoff, henrard_normalize, hori_integral, toda2d)

N = 8
H = toda2d(N)
print("H2 =", H.terms_pq()[1])
print("H4 =", H.terms_pq()[3])

results = {}
for name in ("explicit", "deprit", "henrard"):
    stats = TermCounter()
    t0 = time.perf_counter()
    if name == "explicit":
        G = explicit_generator(H, N, stats)
        Ht = direct_transform(G, H, N, stats)
    elif name == "deprit":
        G, Ht = deprit_classical(H, N, stats)
    else:
        G, Ht = henrard_normalize(H, N, stats)
    results[name] = Ht
    print(f"{name:9s} {time.perf_counter() - t0:6.3f} s  max stored terms {stats.max_terms}")

ref = results["explicit"]
for name in ("deprit", "henrard"):
    diff = [n for n in range(N + 1) if ref.eps_coeff(n) != results[name].eps_coeff(n)]
    print(f"{name} vs explicit: first difference at eps^{diff[0]}" if diff
          else f"{name} vs explicit: identical through eps^{N}")

# second-order block of the normal form, in Birkhoff variables
print("\nH~ eps^2:", ref.eps_coeff(2))

# the Hori integral starts at eps^2 for this model
G4 = explicit_generator(toda2d(4), 4)
I = from_birkhoff(hori_integral(toda2d(4), G4, 4, s=2))
print("\nHori integral, eps^0 block:", I.eps_coeff(0))
