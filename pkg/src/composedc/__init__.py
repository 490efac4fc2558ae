"""Workload placement and power accounting for composable datacentre infrastructures."""

__version__ = "0.1.0"
