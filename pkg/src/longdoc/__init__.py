"""Long Arabic document classification via sentence aggregation and MMR key-sentence selection."""

__version__ = "0.1.0"
