"""External SMT solver process adapter.

Runs an SMT-LIB 2 script through a configurable solver executable and
maps each named query (marked by an `echo "QUERY:name"` line) to a
verdict in {unsat, sat, unknown, timeout, error}.  Discovery order: the
INVARC_SOLVER environment variable, a z3 or cvc5 binary on PATH, then
the bundled Node.js wrapper around the z3-solver WebAssembly build.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import ProtocolError, SolverNotFound

ENV_VAR = "INVARC_SOLVER"
_BUNDLED = Path(__file__).parent / "data" / "z3_smt2.cjs"


@dataclass
class SolverConfig:
    executable: str
    args: tuple = ()
    timeout_ms: int = 10_000
    max_workers: int = 1
    workdir: str = None
    keep_artifacts: bool = False

    def __post_init__(self):
        if not self.executable:
            raise ValueError("executable must be non-empty")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_workers < 1:
            raise ValueError("max_workers must be at least 1")


def discover_solver(timeout_ms=10_000, workdir=None, keep_artifacts=False):
    override = os.environ.get(ENV_VAR)
    if override:
        parts = shlex.split(override)
        if not (shutil.which(parts[0]) or os.path.exists(parts[0])):
            raise SolverNotFound(
                f"{ENV_VAR} points to a missing executable: {parts[0]}")
        return SolverConfig(executable=parts[0], args=tuple(parts[1:]),
                            timeout_ms=timeout_ms, workdir=workdir,
                            keep_artifacts=keep_artifacts)
    z3 = shutil.which("z3")
    if z3:
        return SolverConfig(executable=z3, args=("-smt2",),
                            timeout_ms=timeout_ms, workdir=workdir,
                            keep_artifacts=keep_artifacts)
    cvc5 = shutil.which("cvc5")
    if cvc5:
        return SolverConfig(executable=cvc5, args=("--lang", "smt2"),
                            timeout_ms=timeout_ms, workdir=workdir,
                            keep_artifacts=keep_artifacts)
    node = shutil.which("node")
    if node and _BUNDLED.exists():
        return SolverConfig(executable=node, args=(str(_BUNDLED),),
                            timeout_ms=timeout_ms, workdir=workdir,
                            keep_artifacts=keep_artifacts)
    raise SolverNotFound(
        "no SMT solver found: set INVARC_SOLVER, or install z3/cvc5, "
        "or install node with the z3-solver npm package")


def parse_output(text, query_names):
    """Map query names to verdicts from the solver's standard output."""
    verdicts = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip().strip('"')
        if line.startswith("QUERY:"):
            name = line[len("QUERY:"):]
            if current is not None and current not in verdicts:
                verdicts[current] = "error"
            current = name
        elif line in ("sat", "unsat", "unknown"):
            if current is not None and current not in verdicts:
                verdicts[current] = line
    if current is not None and current not in verdicts:
        verdicts[current] = "error"
    return {name: verdicts.get(name) for name in query_names}


def run_solver(script, cfg):
    """Run every named query of `script`; returns {name: verdict}."""
    names = [q[0] for q in script.queries]
    if not names:
        return {}
    if not (shutil.which(cfg.executable) or os.path.exists(cfg.executable)):
        raise SolverNotFound(f"solver executable not found: {cfg.executable}")
    workdir = cfg.workdir or tempfile.mkdtemp(prefix="invarc-")
    os.makedirs(workdir, exist_ok=True)
    path = os.path.join(workdir, "script.smt2")
    with open(path, "w") as f:
        f.write(script.render())
    cmd = [cfg.executable, *cfg.args, path]
    timed_out = False
    try:
        proc = subprocess.run(
            cmd, capture_output=True, text=True,
            timeout=cfg.timeout_ms / 1000.0)
        stdout, stderr, rc = proc.stdout, proc.stderr, proc.returncode
    except subprocess.TimeoutExpired as e:
        timed_out = True
        stdout = e.stdout or ""
        if isinstance(stdout, bytes):
            stdout = stdout.decode("utf-8", "replace")
        stderr, rc = "", -1
    finally:
        if not cfg.keep_artifacts and cfg.workdir is None:
            try:
                os.unlink(path)
                os.rmdir(workdir)
            except OSError:
                pass
    parsed = parse_output(stdout, names)
    out = {}
    for name in names:
        v = parsed.get(name)
        if v is None:
            v = "timeout" if timed_out else "error"
        out[name] = v
    if not timed_out and rc != 0 and all(v == "error" for v in out.values()) \
            and "QUERY:" not in stdout:
        raise ProtocolError(
            f"solver produced no parseable output (exit {rc}): "
            f"{(stderr or stdout)[:500]}")
    return out
