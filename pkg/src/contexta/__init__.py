"""contexta: context-aware chatbot pipeline over replayed sensor traces."""

__version__ = "0.1.0"
