"""Link-level simulator for two-user MIMO Gaussian interference channels.

Implements five receivers over a turbo-coded BICM chain (interference
whitening, interference-aware detection, and three interference-decoding
variants) plus EXIT-chart analysis tools and a Monte-Carlo PER harness.
"""

__version__ = "0.1.0"
