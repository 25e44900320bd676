"""colweb: agents holding Horn knowledge, queried in context."""

try:
    from ._colweb import Session, eval_term, pretty_program, __version__
except ImportError:  # in-tree build: extension sits next to the package
    from _colweb import Session, eval_term, pretty_program, __version__

__all__ = ["Session", "eval_term", "pretty_program", "__version__"]
