"""Sequential measurements of two dichotomic observables.

Simulate outcome tables from quantum models, decide whether a finite table
admits a quantum realisation, and explore the quantum set in finite
projections.
"""

from .seqcore import ProbabilityTable, FTable, switch_count, table_to_F, validate_admissible
from .qmodel import AtomicState, FiniteDimModel, atomic_to_table, simulate_table
from .certifier import Verdict, certify, certify_a_truncation

__version__ = "0.1.0"

__all__ = [
    "ProbabilityTable", "FTable", "switch_count", "table_to_F", "validate_admissible",
    "AtomicState", "FiniteDimModel", "atomic_to_table", "simulate_table",
    "Verdict", "certify", "certify_a_truncation",
]
