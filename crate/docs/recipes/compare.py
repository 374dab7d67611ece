import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/heavytop_gc")
with open(out / "compare.csv") as f:
    rows = list(csv.reader(f))
header, data = rows[0], np.array(rows[1:], dtype=float)
for i, name in enumerate(header[1:], start=1):
    plt.semilogy(data[:, 0], data[:, i] + 1e-18, label=name, lw=0.8)
plt.xlabel("t")
plt.ylabel("relative Casimir error")
plt.legend(fontsize="small")
plt.savefig(out / "compare.png", dpi=150)
