"""Core O-information algebra, estimators and inference."""
