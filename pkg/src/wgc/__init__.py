"""wgc: a deterministic hexagonal wargame engine and multi-agent benchmark.

Five sub-environments (standard, poac, cmac, amac, srmac) share one
tick-based core; the package layers an RL-style step surface, scripted
baseline policies, an evaluation harness with replay files, a wire
protocol for external learners, and a small web service for human play.
"""

__version__ = "0.1.0"

ENGINE_ID = f"wgc/{__version__}"
