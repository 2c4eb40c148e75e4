"""Command-line interface: ``itespec <command> [options]``.

Exit status is 0 on success, 2 when the input violates a standing hypothesis
(degenerate index, inadmissible ray) and 1 for any other failure.
Diagnostics go to standard error; artifacts go to files or standard output.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from itespec import io
from itespec.errors import HypothesisViolation

COMMANDS = ("solve", "count", "weyl", "trace-check", "fd-verify", "report")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    index_spec: str = ""
    t_max: float = 0.0
    dim: int = 2
    p: int = 2
    mu: tuple = (0.0, 1.0)
    radii: list = field(default_factory=list)
    window: tuple = (20.0, 50.0)
    grid: str = ""
    alpha_ref: str = "auto"
    eigs: str = ""
    modes: list = field(default_factory=list)
    fd_grid: int = 400
    count: int = 5
    out: str = ""
    dir: str = ""
    threads: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")

    @property
    def mu_complex(self) -> complex:
        return complex(*self.mu)

    def to_json(self) -> str:
        d = asdict(self)
        d["mu"] = [float(self.mu[0]), float(self.mu[1])]
        d["window"] = [float(self.window[0]), float(self.window[1])]
        d["radii"] = [float(r) for r in self.radii]
        d["t_max"] = float(self.t_max)
        return io.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        d = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        d["mu"] = tuple(d.get("mu", (0.0, 1.0)))
        d["window"] = tuple(d.get("window", (20.0, 50.0)))
        return cls(**d)


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with ``stop`` included when it lies on the grid."""
    try:
        a, b, h = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"grid must be start:stop:step, got {text!r}") from exc
    if h <= 0 or b < a:
        raise UsageError("grid needs step > 0 and stop >= start")
    n = int(math.floor((b - a) / h + 1e-9)) + 1
    return a + h * np.arange(n)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="itespec", description="Interior transmission eigenvalues of the unit disc.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="compute the spectrum below a radius")
    s.add_argument("--index", required=True)
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=0)

    c = sub.add_parser("count", help="counting function on a grid")
    c.add_argument("--eigs", required=True)
    c.add_argument("--grid", required=True)
    c.add_argument("--alpha-ref", default="auto")
    c.add_argument("--dim", type=int, default=2)
    c.add_argument("--out", required=True)

    w = sub.add_parser("weyl", help="Weyl coefficient of an index")
    w.add_argument("--index", required=True)
    w.add_argument("--dim", type=int, default=2)

    t = sub.add_parser("trace-check", help="trace identity along an admissible ray")
    t.add_argument("--eigs", required=True)
    t.add_argument("--mu", default="0,1")
    t.add_argument("--p", type=int, default=2)
    t.add_argument("--radii", default="100,400,1600")
    t.add_argument("--dim", type=int, default=2)
    t.add_argument("--out", required=True)

    f = sub.add_parser("fd-verify", help="finite differences vs dispersion roots")
    f.add_argument("--index", required=True)
    f.add_argument("--modes", default="0,1,2")
    f.add_argument("--grid", type=int, default=400)
    f.add_argument("--count", type=int, default=5)
    f.add_argument("--out", required=True)

    r = sub.add_parser("report", help="merge artifacts into summary.json")
    r.add_argument("--dir", required=True)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    if cmd == "solve":
        return RunConfig(cmd, index_spec=ns.index, t_max=ns.tmax, out=ns.out, threads=ns.threads)
    if cmd == "count":
        return RunConfig(cmd, eigs=ns.eigs, grid=ns.grid, alpha_ref=ns.alpha_ref, dim=ns.dim,
                         out=ns.out)
    if cmd == "weyl":
        return RunConfig(cmd, index_spec=ns.index, dim=ns.dim)
    if cmd == "trace-check":
        mu = _floats(ns.mu)
        if len(mu) != 2:
            raise UsageError("--mu takes re,im")
        return RunConfig(cmd, eigs=ns.eigs, mu=tuple(mu), p=ns.p, radii=_floats(ns.radii),
                         dim=ns.dim, out=ns.out)
    if cmd == "fd-verify":
        return RunConfig(cmd, index_spec=ns.index, modes=[int(m) for m in _floats(ns.modes)],
                         fd_grid=ns.grid, count=ns.count, out=ns.out)
    return RunConfig(cmd, dir=ns.dir)


def cmd_solve(cfg: RunConfig) -> None:
    from itespec.counting import compute_spectrum
    from itespec.dispersion import parse_index

    index = parse_index(cfg.index_spec)
    spec = compute_spectrum(index, cfg.t_max, threads=cfg.threads or None)
    spec.save(cfg.out)
    print(f"{len(spec)} eigenvalues, cutoff mode {spec.cutoff_mode}, "
          f"certificate {spec.completeness_certificate}", file=sys.stderr)


def _alpha_ref(text: str, index, dim: int) -> float:
    if text == "auto":
        from itespec.weyl import weyl_alpha
        return weyl_alpha(index, dim)[0]
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"--alpha-ref must be 'auto' or a number, got {text!r}") from exc


def cmd_count(cfg: RunConfig) -> None:
    from itespec.counting import SpectrumSet, count_table, write_counts_csv

    spec = SpectrumSet.load(cfg.eigs)
    alpha = _alpha_ref(cfg.alpha_ref, spec.index, cfg.dim)
    rows = count_table(spec, parse_grid(cfg.grid), alpha, cfg.dim)
    write_counts_csv(cfg.out, rows)


def cmd_weyl(cfg: RunConfig) -> None:
    from itespec.dispersion import parse_index
    from itespec.weyl import weyl_alpha

    alpha, err = weyl_alpha(parse_index(cfg.index_spec), cfg.dim)
    print(f"{alpha:.15g} ± {err:.3g}")


def cmd_trace(cfg: RunConfig) -> None:
    from itespec.counting import SpectrumSet
    from itespec.tracecheck import trace_compare
    from itespec.weyl import TraceQuery

    spec = SpectrumSet.load(cfg.eigs)
    query = TraceQuery(cfg.mu_complex, cfg.p, tuple(cfg.radii), cfg.dim)
    rep = trace_compare(spec, query)
    rep.save_json(cfg.out)
    csv_path = Path(cfg.out).with_suffix(".csv")
    rep.save_csv(csv_path)


def cmd_fd(cfg: RunConfig) -> None:
    from itespec.dispersion import parse_index
    from itespec.fdcheck import RadialGrid, fd_vs_shooting, write_fd_csv

    rows = fd_vs_shooting(parse_index(cfg.index_spec), cfg.modes, RadialGrid(cfg.fd_grid), cfg.count)
    write_fd_csv(cfg.out, rows)


def _load_spectra(folder: Path):
    from itespec.counting import SpectrumSet

    out = []
    for path in sorted(folder.glob("*.json")):
        try:
            d = io.read_json(path)
        except (OSError, json.JSONDecodeError):
            continue
        if isinstance(d, dict) and "header" in d and "records" in d:
            out.append(SpectrumSet.from_dict(d))
    return out


def _pick(spectra, index_spec, t_min):
    cands = [s for s in spectra if s.index.spec_string() == index_spec and s.t_max >= t_min]
    return min(cands, key=lambda s: s.t_max) if cands else None


def cmd_report(cfg: RunConfig) -> None:
    from itespec import acceptance as acc
    from itespec.dispersion import parse_index

    folder = Path(cfg.dir)
    if not folder.is_dir():
        raise UsageError(f"{folder} is not a directory")
    spectra = _load_spectra(folder)
    results, missing = [], []
    const4 = parse_index("const:4").spec_string()
    radial = parse_index("radial:3,1").spec_string()
    s1 = _pick(spectra, const4, 50.0)
    s2 = _pick(spectra, radial, 50.0)
    if s1 is not None:
        results += [acc.criterion_1(s1), acc.criterion_5(s1), acc.criterion_6(s1)]
    else:
        missing += [1, 5, 6]
    if s2 is not None:
        results.append(acc.criterion_2(s2))
    else:
        missing.append(2)
    trace = None
    for path in sorted(folder.glob("*.json")):
        d = io.read_json(path)
        if isinstance(d, dict) and "radii" in d and "gap_decreasing" in d:
            trace = d
    if trace is not None:
        results.append(acc.criterion_3(trace))
    else:
        missing.append(3)
    fd_rows = None
    for path in sorted(folder.glob("*.csv")):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames and "refine_ratio" in reader.fieldnames:
                fd_rows = list(reader)
    if fd_rows is not None:
        results.append(acc.criterion_7(fd_rows))
    else:
        missing.append(7)
    results += [acc.criterion_4(), acc.criterion_8(), acc.criterion_9()]
    results.sort(key=lambda r: r.id)
    for r in results:
        print(r.line())
    summary = {
        "criteria": [r.to_dict() for r in results]
                    + [{"id": i, "name": acc.NAMES[i], "status": "missing"} for i in sorted(missing)],
        "all_passed": all(r.passed for r in results) and not missing,
    }
    summary["criteria"].sort(key=lambda d: d["id"])
    io.write_json(folder / "summary.json", summary)


HANDLERS = {"solve": cmd_solve, "count": cmd_count, "weyl": cmd_weyl, "trace-check": cmd_trace,
            "fd-verify": cmd_fd, "report": cmd_report}


def run(argv=None) -> int:
    try:
        cfg = config_from_args(build_parser().parse_args(argv))
        HANDLERS[cfg.command](cfg)
    except HypothesisViolation as exc:
        print(f"error: hypothesis violated: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - the CLI reports every failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
