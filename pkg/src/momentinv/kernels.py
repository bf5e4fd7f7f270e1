"""Backend selection for the numeric kernels.

The compiled extension is used when it imports; setting ``MOMENTINV_PURE=1``
forces the numpy implementation. ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os

from . import _kernels_py

BLOCK = _kernels_py.BLOCK
monomial_exponents = _kernels_py.monomial_exponents

_compiled = None
if os.environ.get("MOMENTINV_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

if _compiled is not None:
    BACKEND = "compiled"
    power_sums = _compiled.power_sums
    eval_monomials = _compiled.eval_monomials
else:
    BACKEND = "python"
    power_sums = _kernels_py.power_sums
    eval_monomials = _kernels_py.eval_monomials

__all__ = ["BACKEND", "BLOCK", "power_sums", "eval_monomials", "monomial_exponents"]
