"""fairaudit: fairness audit and bias mitigation for binary tabular classification."""

__version__ = "0.1.0"
