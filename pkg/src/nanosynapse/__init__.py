"""Behavioral simulator of a two-crossbar nanosynaptic learning system.

A fixed random projection crossbar feeds hidden neurons that integrate
per-frame activations over time windows; a second crossbar is trained
online with a sign-conditional pulse programming rule.
"""

__version__ = "0.1.0"
