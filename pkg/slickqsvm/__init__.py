"""Bagged SVM ensembles (classical, annealed QUBO, gate-kernel) for SAR oil-spill segmentation"""

__version__ = "1.0.0"
