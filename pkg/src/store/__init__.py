from .trace_store import TraceStore, trace_frame, trace_columns, seed_summary

__all__ = ["TraceStore", "trace_frame", "trace_columns", "seed_summary"]
