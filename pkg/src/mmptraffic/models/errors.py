class InfeasibleParameters(ValueError):
    """A requested target (mean, Hurst parameter) has no valid model parameters."""
