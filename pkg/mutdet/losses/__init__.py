"""losses/__init__.py

Matching, alignment, detection and calibration losses of the pre-training objective.
"""
