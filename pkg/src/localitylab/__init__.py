"""Executable cross-checks of locality models, online bipartite coloring and
LCL automata on paths and rooted trees."""

__version__ = "0.1.0"
