"""
Core numerics: potential and regularizer, singular quadrature, the Prufer
shooting solver, the asymptotic expansion and the independent oracle.
"""
