"""Ground states and collapse diagnostics for the 2D attractive NLS energy
with harmonic trap and rotation."""

__version__ = "0.1.0"
