"""Charge spaces, Lorentz norms and almost-periodic Paley-type inequalities at desk scale."""
__version__ = "0.1.0"
