"""LLM-orchestrated homework tutor for an undergraduate circuit-analysis course."""

__version__ = "0.1.0"
