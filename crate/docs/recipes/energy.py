import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/heavytop_det")
d = np.genfromtxt(out / "trajectory.csv", delimiter=",", names=True)
h = d["hamiltonian"]
plt.semilogy(d["t"], np.abs(h - h[0]) / abs(h[0]) + 1e-18)
plt.xlabel("t")
plt.ylabel("relative energy error")
plt.savefig(out / "energy.png", dpi=150)
