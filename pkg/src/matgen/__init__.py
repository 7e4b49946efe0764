"""matgen: generative modeling of procedural material node graphs."""

__version__ = "0.1.0"
