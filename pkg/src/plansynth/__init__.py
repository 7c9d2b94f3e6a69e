"""plansynth: plan-grounded dialogue synthesis, preference pairs, and
reference training objectives with verified gradients."""

__version__ = "0.1.0"
