import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/heavytop_gc")
d = np.genfromtxt(out / "order_fit.csv", delimiter=",", names=True)
slope = next(
    float(line.split(":", 1)[1])
    for line in (out / "manifest").read_text().splitlines()
    if line.startswith("# slope:")
)
plt.loglog(d["dt"], d["mean_error"], "o-", label=f"fitted slope {slope:.3f}")
plt.loglog(d["dt"], d["mean_error"][0] * (d["dt"] / d["dt"][0]), "k--", label="slope 1")
plt.xlabel("dt")
plt.ylabel("mean terminal error")
plt.legend()
plt.savefig(out / "order.png", dpi=150)
