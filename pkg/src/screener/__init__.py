"""Research-integrity screening toolkit.

Scans article text for tortured phrases against a curated dictionary,
analyses editorial timelines for anomalous submission/revision/acceptance
patterns, and compares machine-generated-text detector score distributions
with distribution-free confidence bands.
"""

__version__ = "0.1.0"
