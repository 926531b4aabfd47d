"""vc-gap-lab: a desk-scale verification lab for vertex cover SDP gaps."""

__version__ = "0.1.0"
