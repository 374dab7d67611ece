import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/heavytop_det")
d = np.genfromtxt(out / "trajectory.csv", delimiter=",", names=True)
ax = plt.figure().add_subplot(projection="3d")
ax.plot(d["pi1"], d["pi2"], d["pi3"], lw=0.5)
ax.set_xlabel("pi1")
ax.set_ylabel("pi2")
ax.set_zlabel("pi3")
plt.savefig(out / "trajectory.png", dpi=150)
