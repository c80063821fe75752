"""armnav: headless deterministic pick-and-place simulation.

A mobile agent with a three-joint swivel arm operates in procedurally
generated box-world rooms. The package covers arm kinematics, collision
and push resolution, task dataset generation, an episode engine with
shaped rewards, evaluation metrics, and a newline-delimited JSON wire
protocol for external controllers.
"""

__version__ = "0.1.0"

PROTOCOL_VERSION = 1
