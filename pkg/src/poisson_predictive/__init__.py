"""Bayesian predictive distributions for independent Poisson observables.

Shrinkage priors, exact and Monte Carlo Kullback-Leibler risks, and the
numerical machinery behind the admissibility and domination results.
"""
__version__ = "0.1.0"
