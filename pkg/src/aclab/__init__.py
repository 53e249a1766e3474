"""Actor-critic laboratory: from-scratch networks, environments, agents, harness."""

__version__ = "0.1.0"
