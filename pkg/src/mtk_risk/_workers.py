from __future__ import annotations

import os

ENV_VAR = "MTK_RISK_THREADS"


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: explicit request, capped by MTK_RISK_THREADS when set."""
    cap = os.environ.get(ENV_VAR)
    cap_n = max(1, int(cap)) if cap and cap.strip().isdigit() else None
    n = requested if requested is not None else (cap_n or os.cpu_count() or 1)
    n = max(1, int(n))
    if cap_n is not None:
        n = min(n, cap_n)
    return n
