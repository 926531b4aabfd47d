"""Tests package for vc-gap-lab."""
