"""Command line driver: ``rht FILE [options]``.

Exit codes: 0 success, 1 parse error, 2 validation error or failed check,
3 computation error, 4 unsafe truncation.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from rht import dsl
from rht.errors import DslError, RhtError, UnsafeTruncation, ValidationError
from rht.gca import check_d_squared, check_group_action, check_morphism
from rht.hochschild import connes_complex, hochschild_of_ring
from rht.report import FORMATS, degree_entry, make_report, transfer_report_dict
from rht.transfer import TransferJob, betti_alternating_sum, euler_characteristic, run_transfer

DEFAULT_MAX_DEGREE = 12
HARD_CAP = 64
EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_TRUNCATION = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    max_degree: int = DEFAULT_MAX_DEGREE
    length_cutoff: int | None = None
    route: str = "alt"
    fmt: str = "table"

    def validate(self, cap: int):
        if self.max_degree < 0:
            raise ValidationError("max degree must be >= 0")
        if self.max_degree > cap:
            raise ValidationError(f"max degree {self.max_degree} exceeds the cap {cap} (set RHT_MAX_DEGREE to raise it)")
        if self.length_cutoff is not None and self.length_cutoff < 0:
            raise ValidationError("length cutoff must be >= 0")
        if self.route not in ("alt", "bar", "both"):
            raise ValidationError(f"unknown route {self.route!r}")
        if self.fmt not in FORMATS:
            raise ValidationError(f"unknown format {self.fmt!r}")


def hard_cap() -> int:
    env = os.environ.get("RHT_MAX_DEGREE")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"RHT_MAX_DEGREE must be an integer, got {env!r}") from None
    return HARD_CAP


def exit_code_for(err: Exception) -> int:
    if isinstance(err, DslError):
        return EXIT_PARSE
    if isinstance(err, UnsafeTruncation):
        return EXIT_TRUNCATION
    if isinstance(err, ValidationError):
        return EXIT_VALIDATION
    return EXIT_COMPUTATION


class CheckFailed(ValidationError):
    """A ``check`` job (or an equivariance verdict) found a defect."""


class _CheckFailure(CheckFailed):
    def __init__(self, report):
        super().__init__(f"{report['job']}: check failed")
        self.report = report


def _job_text(j: dsl.JobDecl) -> str:
    return f"{j.kind} {', '.join(j.names)}"


def _window_report(job, W, hi, extra):
    degrees = []
    for n in range(0, hi + 1):
        H = W.homology(n)
        b = W.basis(n)
        degrees.append(degree_entry(n, [W.label(b[c]) for c in H.hom_cols], [], None, n <= W.validity, dim=H.dim))
    diag = {"window": W.name, "stamps": list(W.stamps)}
    diag.update(extra)
    return make_report(job, degrees, diag)


def run_job(job: dsl.JobDecl, env: dsl.Elaborated, cfg: RunConfig) -> dict:
    """Execute one job; raise on failure (check failures raise ``CheckFailed``)."""
    text = _job_text(job)
    N = cfg.max_degree
    if job.kind == "check":
        out = []
        for nm in job.names:
            if nm in env.algebras:
                rep = check_d_squared(env.algebras[nm], N)
            elif nm in env.maps:
                rep = check_morphism(env.maps[nm], N)
            else:
                rep = check_group_action(env.actions[nm], N)
            out.append(rep.as_dict())
        report = make_report(text, [], {"checks": out, "passed": all(r["passed"] for r in out)})
        if not report["diagnostics"]["passed"]:
            raise _CheckFailure(report)
        return report
    if job.kind == "hh":
        A = env.algebras[job.names[0]]
        W = hochschild_of_ring(A, N, cfg.length_cutoff)
        return _window_report(text, W, N, {})
    if job.kind == "hc":
        A = env.algebras[job.names[0]]
        W = connes_complex(A, N, cfg.length_cutoff)
        return _window_report(text, W, N, {})
    if job.kind == "euler":
        A = env.algebras[job.names[0]]
        rep = euler_characteristic(A, N, cfg.length_cutoff)
        out = transfer_report_dict(rep, text)
        out["diagnostics"]["betti_alternating_sum"] = betti_alternating_sum(A, max(N, 2 * max(A.degrees, default=1) + 2))
        return out
    if job.kind == "transfer":
        phi = env.maps[job.names[0]]
        aS = env.actions[job.names[1]] if len(job.names) == 3 else None
        aR = env.actions[job.names[2]] if len(job.names) == 3 else None
        route = {"alt": "alt", "bar": "zigzag", "both": "both"}[cfg.route]
        rep = run_transfer(TransferJob(phi, N, route, cfg.length_cutoff, aS, aR, name=phi.name))
        out = transfer_report_dict(rep, text)
        if rep.equivariance and not all(r["passed"] for r in rep.equivariance):
            raise _CheckFailure(out)
        return out
    raise ValidationError(f"unknown job kind {job.kind!r}")


def _worker(args):
    text, path, index, cfg = args
    sf = dsl.parse(text, path)
    env = dsl.elaborate(sf)
    jobs = [d for d in sf.decls if isinstance(d, dsl.JobDecl)]
    return _run_safely(jobs[index], env, cfg)


def _run_safely(job, env, cfg):
    try:
        return ("ok", run_job(job, env, cfg), None)
    except _CheckFailure as e:
        return ("fail", e.report, (EXIT_VALIDATION, str(e)))
    except RhtError as e:
        return ("error", None, (exit_code_for(e), f"{_job_text(job)}: {type(e).__name__}: {e}"))


def run(text: str, cfg: RunConfig, path=None, parallel=1):
    """Parse and run every job; returns ``(reports, [(code, message)])``."""
    sf = dsl.parse(text, path)
    env = dsl.elaborate(sf)
    jobs = [d for d in sf.decls if isinstance(d, dsl.JobDecl)]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            results = list(ex.map(_worker, [(text, path, i, cfg) for i in range(len(jobs))]))
    else:
        results = [_run_safely(j, env, cfg) for j in jobs]
    reports, errors = [], []
    for status, rep, err in results:
        if rep is not None:
            reports.append(rep)
        if err is not None:
            errors.append(err)
    return reports, errors


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rht", description="Hochschild homology, Connes complexes and transfers of cdgas over Q.")
    p.add_argument("file", help="presentation file ('-' for stdin)")
    p.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE)
    p.add_argument("--length-cutoff", type=int, default=None)
    p.add_argument("--route", choices=["alt", "bar", "both"], default="alt")
    p.add_argument("--format", choices=sorted(FORMATS), default="table")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--parallel-jobs", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.file == "-":
            text, path = sys.stdin.read(), "<stdin>"
        else:
            with open(args.file, encoding="utf-8") as fh:
                text, path = fh.read(), args.file
    except OSError as e:
        print(f"rht: cannot read {args.file}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    cfg = RunConfig(args.max_degree, args.length_cutoff, args.route, args.format)
    try:
        cfg.validate(hard_cap())
        reports, errors = run(text, cfg, path, max(1, args.parallel_jobs))
    except DslError as e:
        print(f"{path}:{e}  [{type(e).__name__}]", file=sys.stderr)
        return EXIT_PARSE
    except RhtError as e:
        print(f"rht: {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)
    out = FORMATS[cfg.fmt](reports)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    for _code, msg in errors:
        print(f"rht: {msg}", file=sys.stderr)
    return errors[0][0] if errors else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
