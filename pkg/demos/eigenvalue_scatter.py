"""Export the eigenvalue scatter of a Haar unitary vs its truncation.

The parent spectrum sits on the unit circle; removing one row and column
pulls every eigenvalue strictly inside, typically by O(1/N).  The CSV
written here is the input for ``plotview --kind figure1``.
"""

import numpy as np

from tue_overlaps import figure1_data

N = 500
fig = figure1_data(N, seed=1)

depth = 1.0 - np.abs(fig.tue) ** 2
print(f"parent eigenvalues: {fig.cue.size}, all unimodular to "
      f"{np.abs(np.abs(fig.cue) - 1).max():.1e}")
print(f"truncation eigenvalues: {fig.tue.size}, max modulus {np.abs(fig.tue).max():.6f}")
print(f"median depth 1 - |lam|^2 = {np.median(depth):.4f}  (~{np.median(depth) * N:.1f}/N)")
print(f"dashed reference circle at radius {fig.circle_radius}")

path = "figure1.csv"
with open(path, "w", encoding="utf-8") as fh:
    fh.write("label,re,im\n")
    for z in fig.cue:
        fh.write(f"cue,{z.real:.17g},{z.imag:.17g}\n")
    for z in fig.tue:
        fh.write(f"tue,{z.real:.17g},{z.imag:.17g}\n")
    fh.write(f"circle,{fig.circle_radius:.17g},0\n")
print(f"wrote {path}; render it with: plotview --kind figure1 --in {path} --out figure1.png")
print("(the same file comes from: tue figure1 --n 500 --seed 1 --out figure1.csv)")
