"""Analysis and synthesis of distributed implementations of Petri nets."""

__version__ = "0.1.0"
