class NumericalError(RuntimeError):
    """A numerical invariant failed beyond its tolerance."""
