"""Gradient descent for factorized low-rank matrix sensing, with diagnostics.

Subpackages and modules:

* :mod:`factorgd.linalg`: dense linear algebra and seeded Gaussian sampling
* :mod:`factorgd.sensing`: Gaussian and identity measurement operators
* :mod:`factorgd.problem`: ground truth, measurements, initializations
* :mod:`factorgd.optimizer`: symmetric and asymmetric gradient steps, run loop
* :mod:`factorgd.diagnostics`: per-iteration records and rate fits
* :mod:`factorgd.accel`: one-shot SVD rebalancing
* :mod:`factorgd.toycase`: closed-form k = r + 1 factorization dynamics
* :mod:`factorgd.harness`: presets, config files, CSV/SVG output, CLI
"""

__version__ = "0.1.0"
