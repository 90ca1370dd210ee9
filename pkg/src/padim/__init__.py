"""Load-adaptive massive MIMO energy efficiency and PA dimensioning."""

__version__ = "0.1.0"
