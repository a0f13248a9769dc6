"""Shortcuts to adiabaticity for a massless scalar field in a 1+1D cavity with a moving mirror.

Modules:
    trajectory  mirror worldlines L(t)
    moore       Moore functions, null-ray recursion, particle-creation residual
    sta         WKB phase and effective (shortcut) trajectories
    stress      stress tensor, energies, adiabaticity parameter
    otto        Otto cycles built from these strokes
    cli         command-line front end
"""

__version__ = "0.1.0"
