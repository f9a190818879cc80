"""Crowd-verified route recommendation engine.

Evaluates competing recommended routes by asking crowd workers minimal
landmark-based yes/no questions, assigning each task to the workers most
knowledgeable about the area, and aggregating their answers into a
verified best route.
"""

__version__ = "0.1.0"
