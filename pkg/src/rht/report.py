"""Serialization of job results: JSON, plain table and CSV."""

from __future__ import annotations

import csv
import io
import json

from rht.exactlin import SparseMatrix, fmt

SCHEMA = 1


def matrix_rows(m: SparseMatrix) -> list:
    """Row-major list of ``"p/q"`` strings."""
    rows = [["0"] * m.cols for _ in range(m.rows)]
    for j in range(m.cols):
        for i, v in m.column(j).items():
            rows[i][j] = fmt(v)
    return rows


def degree_entry(n, src_basis, tgt_basis, matrix=None, certified=True, **extra) -> dict:
    out = {
        "n": n,
        "src_basis": list(src_basis),
        "tgt_basis": list(tgt_basis),
        "matrix": matrix_rows(matrix) if matrix is not None else [],
        "certified": bool(certified),
    }
    out.update(extra)
    return out


def make_report(job: str, degrees: list, diagnostics: dict) -> dict:
    return {"schema": SCHEMA, "job": job, "degrees": degrees, "diagnostics": diagnostics}


def transfer_report_dict(rep, job_text: str) -> dict:
    degrees = [degree_entry(e.n, e.src_basis, e.tgt_basis, e.matrix, e.certified) for e in rep.degrees]
    diag = dict(rep.diagnostics)
    diag["route"] = rep.route
    if rep.equivariance:
        diag["equivariance"] = rep.equivariance
    return make_report(job_text, degrees, diag)


def to_json(reports: list) -> str:
    return json.dumps(reports, ensure_ascii=False, indent=2, sort_keys=False) + "\n"


def to_table(reports: list) -> str:
    lines = []
    for r in reports:
        lines.append(f"== {r['job']}")
        for k, v in r["diagnostics"].items():
            if k == "equivariance":
                ok = all(x["passed"] for x in v)
                lines.append(f"   equivariance: {'pass' if ok else 'FAIL'} ({len(v)} checks)")
            else:
                lines.append(f"   {k}: {v}")
        for d in r["degrees"]:
            mark = "" if d["certified"] else "  (uncertified)"
            src = ", ".join(d["src_basis"]) or "0"
            if "dim" in d:
                lines.append(f"  {d['n']:>3}  dim {d['dim']}: {src}{mark}")
                continue
            tgt = ", ".join(d["tgt_basis"]) or "0"
            mat = "; ".join(" ".join(row) for row in d["matrix"]) or "-"
            lines.append(f"  {d['n']:>3}  [{src}] -> [{tgt}]  {mat}{mark}")
    return "\n".join(lines) + "\n"


def to_csv(reports: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["job", "n", "certified", "src_basis", "tgt_basis", "matrix"])
    for r in reports:
        for d in r["degrees"]:
            mat = ";".join(" ".join(row) for row in d["matrix"])
            w.writerow([r["job"], d["n"], int(d["certified"]), "|".join(d["src_basis"]), "|".join(d["tgt_basis"]), mat])
    return buf.getvalue()


FORMATS = {"json": to_json, "table": to_table, "csv": to_csv}
