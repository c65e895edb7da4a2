"""Entangled two-photon absorption spectroscopy simulator.

Biphoton states from quasi-phase-matched down-conversion, Hong-Ou-Mandel
interference, molecular absorption modelled as a notch filter, photon and
detection budgets, and Monte-Carlo noise accumulation.
"""

__version__ = "0.1.0"
