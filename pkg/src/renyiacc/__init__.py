"""Conditional sandwiched Renyi entropies and entropy-accumulation rates.

The package computes the order-alpha sandwiched divergence and the three
conditional entropies built on it (fixed marginal, fully optimized marginal,
and the partially optimized variant for classical side information), verifies
the chain-rule and decomposition identities they satisfy, reproduces a fully
classical counterexample to the all-optimized chain rule, and evaluates
finite-size accumulation rates for spot-checking device-independent
protocols.
"""

__version__ = "0.1.0"
