"""Episode-kernel backend selection.

Prefers the compiled Cython kernel; falls back to the pure-Python twin when
the extension is unavailable. Set ``ARUSIM_PURE_PYTHON=1`` to force the
fallback (used by the backend benchmark and the equivalence tests). The two
backends produce bit-identical results for identical seeds.
"""

import os

if os.environ.get("ARUSIM_PURE_PYTHON"):
    from . import _grid_kernel_py as _impl
else:
    try:
        from . import _grid_kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _grid_kernel_py as _impl

BACKEND = _impl.BACKEND
run_episode = _impl.run_episode
