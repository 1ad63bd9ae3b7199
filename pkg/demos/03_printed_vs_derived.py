"""Printed closed forms compared with independent evaluations.

Each record pairs a printed formula with an engine or derived value at one
configuration.  Run with ``python3 demos/03_printed_vs_derived.py``.
"""

from rymap.discrepancy import discrepancy_records

for rec in discrepancy_records():
    print(f"{rec.equation_id:7s} gap {rec.relative_gap:7.3f}  {rec.description}")
    print(f"        printed: {rec.printed_value}")
    print(f"        {rec.engine_source}: {rec.engine_value}\n")
