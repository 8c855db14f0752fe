"""Traces of singular moduli: exact CM sums, Kloosterman and Weyl sum series, and the K-Bessel harness."""

from .arb import BigComplex, BigReal
from .quadforms import DiscFactorization, QForm
from .traces import TraceReport, compare, trace_direct, trace_rect, trace_sinh_series

__all__ = ["BigComplex", "BigReal", "DiscFactorization", "QForm", "TraceReport", "compare", "trace_direct",
           "trace_rect", "trace_sinh_series"]
