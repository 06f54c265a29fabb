"""detector/__init__.py

Desk-scale two-stage DETR-style detector and its pre-training graph.
"""
