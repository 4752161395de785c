"""Backend selection for the numerical hot loops.

At import time this package picks the compiled extension (``_fast``) when
it is present and falls back to the pure NumPy implementation otherwise.
Set ``CTRLGRAD_PURE=1`` in the environment (before import) to force the
fallback; ``BACKEND`` records what was selected. Both backends expose the
same two entry points with identical semantics:

- ``rk4_lti(M, W, x0, h, steps)``
- ``descent_loop(A, b, c, Bmat, x0, gamma, scale, policy, u_const, gain,
  schedule, max_iters, stop_tol, ref)``
"""

import os

from . import pure
from .pure import (
    POLICY_CONSTANT,
    POLICY_GRAD_FB,
    POLICY_SCHEDULE,
    POLICY_STATE_FB,
    POLICY_ZERO,
)

# NB: do not pre-bind ``_fast = None`` before the relative import -- an
# existing attribute makes ``from . import _fast`` skip the submodule load.
if os.environ.get("CTRLGRAD_PURE", "") in ("", "0"):
    try:
        from . import _fast
    except ImportError:
        _fast = None
else:
    _fast = None

if _fast is not None:
    BACKEND = "compiled"
    rk4_lti = _fast.rk4_lti
    descent_loop = _fast.descent_loop
else:
    BACKEND = "pure"
    rk4_lti = pure.rk4_lti
    descent_loop = pure.descent_loop


def get_backend(name):
    """Return the backend module by name ("pure" or "compiled").

    Used by the benchmark and the cross-backend tests; raises ImportError
    if the compiled extension was not built.
    """
    if name == "pure":
        return pure
    if name == "compiled":
        if _fast is None:
            raise ImportError("compiled kernel extension is not available")
        return _fast
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "BACKEND",
    "rk4_lti",
    "descent_loop",
    "get_backend",
    "pure",
    "POLICY_ZERO",
    "POLICY_CONSTANT",
    "POLICY_STATE_FB",
    "POLICY_GRAD_FB",
    "POLICY_SCHEDULE",
]
