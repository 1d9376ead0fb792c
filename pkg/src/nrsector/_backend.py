"""Select the compiled kernels when available, else the numpy fallback.

Set ``NRSECTOR_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

if os.environ.get("NRSECTOR_PURE_PYTHON", "").strip() not in {"", "0"}:
    from . import _fallback as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as kernels

        BACKEND = "python"

lp_form_many = kernels.lp_form_many
form_values = kernels.form_values
pnorm_ascent = kernels.pnorm_ascent


def pnorm_ascent_batch(Ms, mu, p, F0, max_iter=200, rtol=1e-13):
    """Best p-norm ascent value for each matrix Ms[b] from starts F0[b]."""
    if kernels is _fallback_module():
        return kernels.pnorm_ascent_batch(Ms, mu, p, F0, max_iter, rtol)[0]
    # compiled: one tight loop per matrix is already cheaper than batching
    out = [kernels.pnorm_ascent(M, mu, p, F, max_iter, rtol)[0] for M, F in zip(Ms, F0)]
    return np.asarray(out, dtype=float)


def _fallback_module():
    from . import _fallback

    return _fallback


__all__ = ["BACKEND", "kernels", "lp_form_many", "form_values", "pnorm_ascent",
           "pnorm_ascent_batch"]
