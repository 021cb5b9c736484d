"""Certified computations for ``F_n^(k) - 3^m = F_{n1}^(k) - 3^{m1}``.

Modules, bottom up: :mod:`realball` (ball arithmetic), :mod:`kfib`
(k-generalized Fibonacci numbers and their dominant root), :mod:`contfrac`,
:mod:`baker` (linear forms in logarithms), :mod:`dpreduce` (Dujella-Petho
reduction), :mod:`search` and :mod:`pipeline`.
"""

from .errors import PillaiError
from .pipeline import CertificationReport, PipelineConfig, certify, emit_report

__version__ = "0.1.0"

__all__ = ["CertificationReport", "PillaiError", "PipelineConfig", "certify", "emit_report"]
