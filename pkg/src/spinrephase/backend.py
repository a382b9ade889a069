"""Integration-engine selection.

The hot RK4 loop exists twice: a Cython extension (``_engine_cy``) and a
pure-numpy fallback (``_engine_py``) with identical contracts.  The
compiled engine is preferred when importable.  Set the environment
variable ``SPINREPHASE_BACKEND`` to ``python`` to force the fallback or
``cython`` to require the extension; run ``benchmarks/bench_backends.py``
to compare them.
"""

import os

_requested = os.environ.get("SPINREPHASE_BACKEND", "auto").strip().lower() or "auto"
if _requested not in {"auto", "cython", "python"}:
    raise ImportError(
        f"unknown SPINREPHASE_BACKEND {_requested!r}; use auto, cython or python"
    )

if _requested == "python":
    from . import _engine_py as _engine

    BACKEND = "python"
else:
    try:
        from . import _engine_cy as _engine  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _engine_py as _engine

        BACKEND = "python"

evolve_rk4 = _engine.evolve_rk4
