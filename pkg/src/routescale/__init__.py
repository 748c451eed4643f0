"""Deterministic routing-scalability simulator.

Forwarding planes: flat unicast, map-and-encap, MPLS, stateful
source-specific multicast, and BIER, with a workload generator and an
experiment harness that measures how per-router forwarding state grows.
"""

__version__ = "0.1.0"

from . import bier, harness, multicast, topology, unicast, workload  # noqa: F401
