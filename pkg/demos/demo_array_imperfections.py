"""How antenna imperfections distort a uniform linear array's response.

Builds the stock error model (gain/phase blocks, position offsets, mutual
coupling) for a 20-element half-wavelength array and compares the perturbed
steering vector against the ideal one, sweeping the error weights. Saves a
figure next to this script.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from doa_ae import (
    ArrayConfig,
    ImperfectionWeights,
    build_imperfection_model,
    ideal_steering,
    imperfect_steering,
)

cfg = ArrayConfig(num_elements=20, spacing=0.5)
model = build_imperfection_model(cfg)

print(f"array: {cfg.num_elements} elements at {cfg.spacing} wavelengths")
print(f"coupling coefficient gamma = {model.gamma:.3f}")
print(f"|coupling| first row: {np.round(np.abs(model.coupling[0, :6]), 4)} ...")

theta = -15.0
ideal = ideal_steering(theta, cfg)

fig, axes = plt.subplots(1, 3, figsize=(14, 4))

# element-wise magnitude distortion as the weights ramp up
for alpha in (0.0, 0.5, 1.0):
    w = ImperfectionWeights(gain=alpha, phase=alpha, position=alpha, coupling=alpha)
    a = imperfect_steering(theta, cfg, w, model)
    axes[0].plot(np.abs(a) * np.sqrt(20), marker="o", label=f"weights {alpha:g}")
axes[0].set_xlabel("element")
axes[0].set_ylabel("|a_m| * sqrt(M)")
axes[0].set_title(f"magnitude distortion at {theta:g} deg")
axes[0].legend()

# phase deviation from the ideal response
for alpha in (0.5, 1.0):
    w = ImperfectionWeights(gain=alpha, phase=alpha, position=alpha, coupling=alpha)
    a = imperfect_steering(theta, cfg, w, model)
    axes[1].plot(np.angle(a * np.conj(ideal)), marker="o", label=f"weights {alpha:g}")
axes[1].set_xlabel("element")
axes[1].set_ylabel("phase error (rad)")
axes[1].set_title("phase deviation vs ideal")
axes[1].legend()

im = axes[2].imshow(np.abs(model.coupling), cmap="viridis")
axes[2].set_title("|mutual coupling matrix|")
fig.colorbar(im, ax=axes[2], shrink=0.8)

fig.tight_layout()
out = __file__.replace(".py", ".png")
fig.savefig(out, dpi=120)
print(f"saved {out}")

# sanity: zero weights reproduce the ideal response exactly
off = ImperfectionWeights.none()
deviation = np.max(np.abs(imperfect_steering(theta, cfg, off, model) - ideal))
print(f"zero-weight deviation from ideal: {deviation:.2e}")
