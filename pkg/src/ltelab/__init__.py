"""Desk-scale LTE interference laboratory: resource grids, protocol-aware
interference footprints, ISR metrics, a link-level throughput model and
k-NN interference detection from PM counters."""

__version__ = "0.1.0"
