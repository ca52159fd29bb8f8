"""Small shared helpers: version string, file digests, provenance comment
lines, deterministic parallel mapping, and integer apportionment."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor

__version__ = "0.1.0"

THREADS_ENV = "WHEELPLAN_THREADS"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance_lines(command: str, seed: int | None = None, inputs=()) -> list[str]:
    """Comment lines embedded in generated files. Deliberately contains no
    timestamps so repeated runs are byte-identical."""
    lines = [f"wheelplan {__version__} {command}"]
    if seed is not None:
        lines.append(f"seed {seed}")
    for name in inputs:
        lines.append(f"input {os.path.basename(str(name))} sha256 {sha256_file(name)}")
    return lines


def worker_count(n_items: int) -> int:
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            cap = 1
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_items))


def parallel_map(fn, items) -> list:
    """Map fn over items, preserving input order in the result. Runs in
    worker processes unless the configured worker count is one; fn and items
    must be picklable in that case."""
    items = list(items)
    if not items:
        return []
    workers = worker_count(len(items))
    if workers == 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def largest_remainder(total: int, fractions) -> list[int]:
    """Apportion total into integer parts proportional to fractions; ties on
    the remainder go to the earlier entry."""
    if total < 0:
        raise ValueError("total must be >= 0")
    fr = [float(f) for f in fractions]
    s = sum(fr)
    if s <= 0:
        raise ValueError("fractions must sum to a positive value")
    quotas = [total * f / s for f in fr]
    parts = [int(q) for q in quotas]
    short = total - sum(parts)
    order = sorted(range(len(fr)), key=lambda i: (-(quotas[i] - parts[i]), i))
    for i in order[:short]:
        parts[i] += 1
    return parts
