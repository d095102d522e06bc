"""Failure-aware OSPF weight setting.

Computes ECMP flows and the Fortz-Thorup congestion cost for weighted
directed networks, and searches for integer link weights that stay good
both with all links up and with the most loaded node pair's link failed.
"""

__version__ = "0.1.0"
