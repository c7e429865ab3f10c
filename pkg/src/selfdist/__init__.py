"""Robot self/other distinction in a simulated mirror world.

A simulated 7-joint arm learns a visual forward model online (mixture
density network), infers its body state by free-energy minimisation and
accumulates likelihood evidence to decide whether the moving blob it sees
is itself (mirror), a twin robot, or a human-driven agent.
"""

__version__ = "0.1.0"
