"""Constrained minimizers and spherical recovery curves for the
small-deflection d-cone: the obstacle problem for the profile energy
integral (w'' + w)^2 under w >= 1 and integral (w^2 - w'^2) = 0, the
closed-form fold families that characterize its minimizers, and the
constructive lift of admissible profiles to closed unit-speed curves on the
sphere whose scaled bending energy converges to the limit energy.
"""

__version__ = "0.1.0"
