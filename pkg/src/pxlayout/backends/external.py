"""SMT-LIB2 process client.

Spawns a configured solver executable per check, writes a self-contained
script over stdin, and parses sat/unsat/model/core from stdout.  Defaults to
the bundled reference solver; point PXLAYOUT_SOLVER_EXE (or the config) at a
real z3/cvc5 binary ("z3 -in") to swap engines without code changes.
"""
from __future__ import annotations

import os
import select
import shlex
import subprocess
import sys
import time
from pathlib import Path
from typing import Optional

from ..formula import Model, VarRegistry
from .base import Backend, SolverRequest, SolverResult
from .smtlib import emit_script, parse_core, parse_model, parse_sexprs

ENV_SOLVER = "PXLAYOUT_SOLVER_EXE"


def default_command() -> list[str]:
    env = os.environ.get(ENV_SOLVER)
    if env:
        return shlex.split(env)
    return [sys.executable, "-m", "pxlayout.refsolver"]


class ProtocolError(Exception):
    pass


class _Proc:
    """Line/S-expression reader over a solver subprocess with a deadline."""

    def __init__(self, cmd: list[str], timeout_s: float):
        self.deadline = time.monotonic() + timeout_s
        try:
            self.p = subprocess.Popen(cmd, stdin=subprocess.PIPE,
                                      stdout=subprocess.PIPE,
                                      stderr=subprocess.DEVNULL)
        except OSError as e:
            raise ProtocolError(f"cannot spawn solver {cmd!r}: {e}") from e
        self.buf = b""

    def send(self, text: str):
        try:
            self.p.stdin.write(text.encode())
            self.p.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ProtocolError(f"solver pipe closed: {e}") from e

    def _fill(self):
        remaining = self.deadline - time.monotonic()
        if remaining <= 0:
            raise TimeoutError("solver call timed out")
        r, _, _ = select.select([self.p.stdout], [], [], remaining)
        if not r:
            raise TimeoutError("solver call timed out")
        chunk = os.read(self.p.stdout.fileno(), 65536)
        if not chunk:
            raise ProtocolError("solver closed its output stream")
        self.buf += chunk

    def read_line(self) -> str:
        while b"\n" not in self.buf:
            self._fill()
        line, self.buf = self.buf.split(b"\n", 1)
        return line.decode().strip()

    def read_sexpr(self) -> str:
        """Accumulate one balanced S-expression."""
        text = ""
        depth = 0
        started = False
        while True:
            while not self.buf:
                self._fill()
            chunk = self.buf.decode()
            self.buf = b""
            for i, ch in enumerate(chunk):
                if ch == "(":
                    depth += 1
                    started = True
                elif ch == ")":
                    depth -= 1
                text += ch
                if started and depth == 0:
                    self.buf = chunk[i + 1:].encode()
                    return text

    def close(self):
        try:
            self.send("(exit)\n")
        except (ProtocolError, TimeoutError):
            pass
        try:
            self.p.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self.p.kill()
            self.p.wait()


class ExternalBackend(Backend):
    """One exclusive process per in-flight check; stateless between calls."""

    name = "external"

    def __init__(self, command: Optional[list[str]] = None,
                 audit_dir: Optional[str] = None):
        self.command = list(command) if command else default_command()
        self.audit_dir = audit_dir
        self._audit_n = 0

    def _audit(self, script: str):
        if not self.audit_dir:
            return
        path = Path(self.audit_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"query_{self._audit_n:05d}.smt2").write_text(script)
        self._audit_n += 1

    def check(self, req: SolverRequest) -> SolverResult:
        script, names = emit_script(req.registry, req.hard,
                                    assumptions=req.assumptions,
                                    want_core=req.want_core)
        self._audit(script)
        started = time.monotonic()
        try:
            proc = _Proc(self.command, req.timeout_s)
        except ProtocolError as e:
            return SolverResult("unknown", stats={"reason": str(e)})
        try:
            proc.send(script)
            status = self._read_status(proc)
            if status == "sat":
                proc.send("(get-model)\n")
                arith, bools = parse_model(parse_sexprs(proc.read_sexpr())[0])
                model = self._complete_model(req, arith, bools)
                return SolverResult("sat", model=model,
                                    stats={"wall_s": time.monotonic() - started})
            if status == "unsat":
                core = None
                if req.want_core:
                    proc.send("(get-unsat-core)\n")
                    core = parse_core(parse_sexprs(proc.read_sexpr())[0], names)
                return SolverResult("unsat", core=core,
                                    stats={"wall_s": time.monotonic() - started})
            return SolverResult("unknown", stats={"reason": f"solver answered {status!r}"})
        except TimeoutError:
            proc.p.kill()
            return SolverResult("unknown", stats={"reason": "timeout"})
        except (ProtocolError, ValueError, IndexError) as e:
            return SolverResult("unknown", stats={"reason": f"protocol: {e}"})
        finally:
            proc.close()

    def _read_status(self, proc: _Proc) -> str:
        # skip solver chatter until a verdict or an error report shows up
        while True:
            line = proc.read_line()
            if line in ("sat", "unsat", "unknown"):
                return line
            if line.startswith("(error"):
                raise ProtocolError(line)

    def _complete_model(self, req: SolverRequest, arith: dict[int, int],
                        bools: dict[int, bool]) -> Model:
        model = Model(arith, bools)
        used_a: set[int] = set()
        used_b: set[int] = set()
        for c in req.hard:
            used_a.update(c.arith_vars())
            used_b.update(c.bool_vars())
        for lit in req.assumptions:
            used_b.add(lit.var)
        for vid in used_a:
            if vid not in model.arith:
                var = req.registry.arith[vid]
                lo, hi = var.lower, var.upper
                model.arith[vid] = lo if (lo is not None and lo > 0) else \
                    (hi if (hi is not None and hi < 0) else 0)
        for vid in used_b:
            model.bools.setdefault(vid, False)
        return model
