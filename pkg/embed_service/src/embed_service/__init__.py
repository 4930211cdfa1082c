"""HTTP microservice serving L2-normalized sentence embeddings."""

__version__ = "0.1.0"
