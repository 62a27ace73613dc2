"""Command-line front end, structured reports and the benchmark harness.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 violated series
invariant.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .algebra import ExtScalar, ParseError, PolySeries
from .canonical import from_birkhoff
from .integrals import (IntegrityError, center_elements, center_generators,
                        gustavson_integral, hori_integral)
from .kato import kato_words
from .modelfile import parse_model_file
from .models import BUILTIN, builtin
from .normalize import (GeneratorSeries, HamiltonianModel, TermCounter, deprit_classical,
                        direct_transform, direct_transform_fn, explicit_generator,
                        henrard_normalize)
from .operators import average

__all__ = ["RunConfig", "run", "render", "bench", "bench_csv", "main", "BENCH_HEADER"]

METHODS = ("explicit", "deprit", "henrard")
OUTPUTS = ("generator", "normalized", "hori", "gustavson")
BENCH_HEADER = ("model", "method", "order", "seconds", "max_terms")


@dataclass
class RunConfig:
    """One invocation: what to compute and how to print it."""

    model: str
    order: int
    method: str = "explicit"
    outputs: tuple[str, ...] = ("normalized",)
    frame: str = "pq"
    format: str = "text"
    bench: bool = False
    hori_power: int | None = None
    bench_start: int = 2

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.method not in METHODS + ("all",):
            raise ValueError(f"method must be one of {METHODS + ('all',)}")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ValueError(f"unknown outputs {sorted(bad)}; choose from {OUTPUTS}")
        if self.frame not in ("pq", "birkhoff"):
            raise ValueError("frame must be pq or birkhoff")
        if self.format not in ("text", "json", "csv"):
            raise ValueError("format must be text, json or csv")
        if self.hori_power is not None and not 0 <= self.hori_power <= self.order:
            raise ValueError("hori power must lie in 0..order")

    @property
    def methods(self) -> tuple[str, ...]:
        return METHODS if self.method == "all" else (self.method,)


def load_model(source: str, N: int) -> tuple[HamiltonianModel, Callable[[int], HamiltonianModel]]:
    """Built-in name or model file path; also returns a per-order factory for benches."""
    key = source.replace("-", "_").lower()
    if key in BUILTIN:
        return builtin(key, N), lambda n: builtin(key, n)
    path = Path(source)
    if not path.exists():
        raise ValueError(f"{source!r} is neither a built-in model {sorted(BUILTIN)} nor a file")
    H = parse_model_file(path)
    return H, lambda n: H


@dataclass
class MethodResult:
    generator: GeneratorSeries
    normalized: PolySeries
    to_perturbed: Callable[[PolySeries], PolySeries]
    stats: TermCounter = field(default_factory=TermCounter)


def solve(H: HamiltonianModel, N: int, method: str) -> MethodResult:
    """Normalize with one method and return a map carrying centre elements back."""
    stats = TermCounter()
    if method == "explicit":
        G = explicit_generator(H, N, stats)
        Ht = direct_transform(G, H, N, stats)
    elif method == "deprit":
        G, Ht = deprit_classical(H, N, stats)
    elif method == "henrard":
        G, Ht = henrard_normalize(H, N, stats)
        return MethodResult(G, Ht, lambda f: direct_transform_fn(G, f, N), stats)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MethodResult(G, Ht, lambda f: gustavson_integral(G, f, N), stats)


def _frame(f: PolySeries, frame: str) -> PolySeries:
    return from_birkhoff(f) if frame == "pq" and f.kind == "birkhoff" else f


def _rows(f: PolySeries) -> list[dict]:
    names = f.var_names()
    out = []
    for mono, c in f.terms().items():
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono.exps) if e]
        out.append({"eps": mono.eps_pow, "monomial": "*".join(factors) or "1", "coeff": str(c)})
    return out


def action_table(Ht: PolySeries) -> list[dict]:
    """For ``d = 1``: coefficients of ``(q1^2 + p1^2)^k`` in a secular Birkhoff series.

    Uses ``zeta1*eta1 = -i (q1^2 + p1^2) / 2``.
    """
    if Ht.dim != 1 or Ht.kind != "birkhoff":
        raise ValueError("action table needs a one-degree-of-freedom Birkhoff series")
    factor = ExtScalar(0, 0, "-1/2", 0)
    out = []
    for mono, c in Ht.terms().items():
        a, b = mono.exps
        if a != b:
            raise ValueError("series is not secular")
        out.append({"eps": mono.eps_pow, "power": a, "coeff": str(c * factor ** a)})
    return out


def run(config: RunConfig) -> dict:
    """Compute the requested series; deterministic apart from the bench rows."""
    N = config.order
    H, factory = load_model(config.model, N)
    s = H.hori_power if config.hori_power is None else config.hori_power
    report: dict = {
        "model": H.name,
        "dim": H.dim,
        "omega": [str(w) for w in H.omega.omega],
        "order": N,
        "frame": config.frame,
        "methods": {},
    }
    results: dict[str, MethodResult] = {}
    if config.outputs or (config.method == "all" and not config.bench):
        for m in config.methods:
            res = results[m] = solve(H, N, m)
            if average(res.normalized, H.omega) != res.normalized:
                raise IntegrityError(f"{m}: normalized Hamiltonian is not secular")
            sec: dict = {}
            if "generator" in config.outputs:
                sec["generator"] = _rows(_frame(res.generator.as_series(), config.frame))
            if "normalized" in config.outputs:
                sec["normalized"] = _rows(_frame(res.normalized, config.frame))
                if H.dim == 1:
                    sec["actions"] = action_table(res.normalized)
            if "hori" in config.outputs:
                img = res.to_perturbed(H.h0())
                sec["hori"] = _rows(_frame(hori_integral(H, res.generator, N, s, img), config.frame))
                sec["hori_power"] = s
            if "gustavson" in config.outputs:
                basis = center_generators(H.omega)
                sec["gustavson"] = [
                    {"beta": list(beta), "terms": _rows(_frame(res.to_perturbed(I0), config.frame))}
                    for beta, I0 in zip(basis.betas, center_elements(basis))
                ]
            report["methods"][m] = sec
    if config.method == "all" and results:
        ref = results["explicit"].normalized
        cmp = {}
        for m in METHODS[1:]:
            other = results[m].normalized
            first = next((e for e in range(N + 1) if ref.eps_coeff(e) != other.eps_coeff(e)), None)
            cmp[m] = {"first_differing_eps": first}
        report["comparison"] = cmp
    if config.bench:
        report["bench"] = bench(H.name, factory, config.methods,
                                range(min(config.bench_start, N), N + 1))
    return report


def bench(name: str, factory: Callable[[int], HamiltonianModel], methods: Sequence[str],
          orders) -> list[dict]:
    """Wall time and peak stored term count per (method, order)."""
    rows = []
    for m in methods:
        for n in orders:
            H = factory(n)
            t0 = time.perf_counter()
            res = solve(H, n, m)
            dt = time.perf_counter() - t0
            rows.append({"model": name, "method": m, "order": n,
                         "seconds": f"{dt:.6f}", "max_terms": res.stats.max_terms})
    return rows


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _text_series(rows: list[dict], indent: str = "  ") -> list[str]:
    by_eps: dict[int, list[str]] = {}
    for r in rows:
        mono = "" if r["monomial"] == "1" else "*" + r["monomial"]
        by_eps.setdefault(r["eps"], []).append(f"({r['coeff']}){mono}")
    if not by_eps:
        return [indent + "0"]
    return [f"{indent}eps^{e}: " + " + ".join(t) for e, t in sorted(by_eps.items())]


def render(report: dict, fmt: str) -> str:
    """Serialize a report as text, JSON or CSV."""
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    bench_rows = report.get("bench")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if report["methods"]:
            w.writerow(["method", "output", "index", "eps", "monomial", "coeff"])
            for m, sec in report["methods"].items():
                for out in ("generator", "normalized", "hori"):
                    for r in sec.get(out, []):
                        w.writerow([m, out, 0, r["eps"], r["monomial"], r["coeff"]])
                for idx, g in enumerate(sec.get("gustavson", [])):
                    for r in g["terms"]:
                        w.writerow([m, "gustavson", idx, r["eps"], r["monomial"], r["coeff"]])
        text = buf.getvalue()
        if bench_rows is not None:
            text += ("\n" if text else "") + bench_csv(bench_rows)
        return text
    lines = []
    if report["methods"] or "comparison" in report:
        omega = " ".join(report["omega"])
        lines.append(f"model {report['model']}  dim {report['dim']}  omega {omega}  "
                     f"order {report['order']}  frame {report['frame']}")
    for m, sec in report["methods"].items():
        if "generator" in sec:
            lines.append(f"[{m}] generator")
            lines += _text_series(sec["generator"])
        if "normalized" in sec:
            lines.append(f"[{m}] normalized Hamiltonian")
            lines += _text_series(sec["normalized"])
        if "actions" in sec:
            lines.append(f"[{m}] normalized Hamiltonian as sum of c * eps^n * (q1^2+p1^2)^k")
            for r in sec["actions"]:
                lines.append(f"  n={r['eps']}  k={r['power']}  c={r['coeff']}")
        if "hori" in sec:
            lines.append(f"[{m}] Hori integral, eps^-{sec['hori_power']} (H - U^-1 H0)")
            lines += _text_series(sec["hori"])
        for g in sec.get("gustavson", []):
            lines.append(f"[{m}] Gustavson integral, beta = {tuple(g['beta'])}")
            lines += _text_series(g["terms"])
    if "comparison" in report:
        lines.append("[comparison] first eps order where the normalized Hamiltonian differs from explicit")
        for m, c in report["comparison"].items():
            first = c["first_differing_eps"]
            lines.append(f"  {m}: {'none' if first is None else first}")
    text = "\n".join(lines) + ("\n" if lines else "")
    if bench_rows is not None:
        text += ("\n" if text else "") + bench_csv(bench_rows)
    return text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="katodeprit", description="Normalize perturbed polynomial Hamiltonians exactly.")
    p.add_argument("--model", required=True, help=f"built-in {sorted(BUILTIN)} or model file path")
    p.add_argument("--order", type=int, required=True, help="truncation order N")
    p.add_argument("--method", default="explicit", choices=METHODS + ("all",))
    p.add_argument("--outputs", default=None,
                   help=f"comma list from {','.join(OUTPUTS)} (default normalized; none with --bench)")
    p.add_argument("--frame", default="pq", choices=("pq", "birkhoff"))
    p.add_argument("--format", default="text", choices=("text", "json", "csv"))
    p.add_argument("--out", default=None, help="write to this file instead of stdout")
    p.add_argument("--bench", action="store_true", help="append timing rows per method and order")
    p.add_argument("--bench-start", type=int, default=2, help="first order of the bench sweep")
    p.add_argument("--hori-power", type=int, default=None,
                   help="leading eps power s of the Hori integral (model default)")
    return p


def _words_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="katodeprit words", description="List Kato operator words.")
    p.add_argument("--kind", required=True, choices=("P", "S", "D"))
    p.add_argument("--n", type=int, required=True, help="eps order")
    p.add_argument("--out", default=None)
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "words":
            a = _words_parser().parse_args(argv[1:])
            try:
                words = kato_words(a.kind, a.n)
            except ValueError as e:
                print(f"katodeprit words: error: {e}", file=sys.stderr)
                return 1
            _emit("".join(f"{w}\n" for w in words), a.out)
            return 0
        a = _build_parser().parse_args(argv)
        if a.outputs is None:
            outputs = () if a.bench else ("normalized",)
        else:
            outputs = tuple(o.strip() for o in a.outputs.split(",") if o.strip())
        cfg = RunConfig(model=a.model, order=a.order, method=a.method, outputs=outputs,
                        frame=a.frame, format=a.format, bench=a.bench,
                        hori_power=a.hori_power, bench_start=a.bench_start)
        _emit(render(run(cfg), cfg.format), a.out)
        return 0
    except SystemExit as e:
        return int(e.code or 0)
    except ParseError as e:
        print(f"katodeprit: parse error: {e}", file=sys.stderr)
        return 2
    except IntegrityError as e:
        print(f"katodeprit: invariant violated: {e}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as e:
        print(f"katodeprit: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
