"""Command-line interface.

Every command prints JSON on stdout.  Exit codes: 0 success, 2 usage or
malformed input, 3 write rejected by validation, 4 I/O failure.

Without ``--session`` each invocation is its own session.  With a session
directory (or ``CDC_SESSION_DIR``) the knowledge base, audit log and
contradiction rules persist between invocations, and the meta-layer stays
frozen from the first load until ``--end-session``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import bench
from .bridge import check_analogy, cross_fiber_intersection, cross_session_diff
from .errors import FiberlogError, UnknownConcept
from .inference import Constraint, Query
from .lattice import parse_domain
from .session import Session
from .store import BridgeRecord, FourTuple, KnowledgeBase, iter_jsonl, read_jsonl, save_jsonl
from .validation import ContradictionRule

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REJECTED = 3
EXIT_IO = 4

SESSION_ENV = "CDC_SESSION_DIR"


class Rejected(Exception):
    def __init__(self, payload):
        super().__init__("rejected")
        self.payload = payload


def emit(obj, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def records_json(records) -> list:
    return [t.to_json() for t in sorted(records, key=lambda r: r.sort_key())]


def _read_records(source: str) -> list:
    """A literal JSON line, or a path to a JSONL file."""
    if source.lstrip().startswith("{"):
        return list(iter_jsonl([source]))
    with open(source, encoding="utf-8") as fh:
        return list(iter_jsonl(fh))


def _read_json_arg(value: str):
    if value.lstrip().startswith(("{", "[")):
        return json.loads(value)
    with open(value, encoding="utf-8") as fh:
        return json.load(fh)


def load_rules(path) -> list[ContradictionRule]:
    """Config file: ``{"contradictions": [["rel_a", "rel_b"], ...]}``."""
    cfg = _read_json_arg(str(path))
    return [ContradictionRule(a, b) for a, b in cfg.get("contradictions", [])]


class SessionStore:
    """Persistent session state kept in a directory."""

    def __init__(self, root: Optional[str]):
        self.root = Path(root) if root else None

    @property
    def state_path(self):
        return self.root / "session.json"

    def state(self) -> dict:
        if self.root and self.state_path.exists():
            return json.loads(self.state_path.read_text())
        return {"active": False, "contradictions": []}

    def kb(self) -> KnowledgeBase:
        kb = KnowledgeBase()
        if self.root and (self.root / "kb.jsonl").exists():
            read_jsonl(self.root / "kb.jsonl", kb)
        return kb

    def audit(self) -> list:
        if not self.root or not (self.root / "audit.jsonl").exists():
            return []
        with open(self.root / "audit.jsonl", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def persist(self, session: Session, n_old_audit: int, active: bool, rules) -> None:
        if not self.root:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        save_jsonl(session.kb, self.root / "kb.jsonl")
        with open(self.root / "audit.jsonl", "a", encoding="utf-8") as fh:
            for entry in session.audit[n_old_audit:]:
                fh.write(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n")
        state = {"active": active, "contradictions": sorted([r.rel_a, r.rel_b] for r in rules)}
        self.state_path.write_text(json.dumps(state, sort_keys=True) + "\n")


def _add_files(kb: KnowledgeBase, paths) -> int:
    n = 0
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            for rec in iter_jsonl(fh):
                if isinstance(rec, BridgeRecord):
                    kb.store_bridge(rec)
                else:
                    kb.add(rec)
                n += 1
    return n


# command handlers; each returns a JSON-able result

def cmd_load(session: Session, args, preloaded: int):
    n = preloaded
    if args.checked:
        for p in args.files:
            for rec in _read_records(p):
                if isinstance(rec, BridgeRecord):
                    session.add_bridge(rec)
                else:
                    session.insert(rec)
                n += 1
    elif not args.early:
        n += _add_files(session.kb, args.files)
    kb = session.kb
    return {"loaded": n, "records": len(kb), "fibers": kb.n_worlds, "bridges": len(kb.all_bridges())}


def cmd_insert(session: Session, args):
    recs = _read_records(args.source)
    outcomes = []
    for rec in recs:
        if not isinstance(rec, FourTuple):
            raise FiberlogError("bridge records go through 'bridge add'")
        outcomes.append(session.insert(rec, checked=not args.unchecked))
    payload = [o.to_json() for o in outcomes]
    if len(payload) == 1:
        payload = payload[0]
    if any(not o.accepted for o in outcomes):
        raise Rejected(payload)
    return payload


def cmd_remove(session: Session, args):
    return [{"tuple": t.to_json(), "status": session.remove(t)} for t in _read_records(args.source)]


def cmd_query(session: Session, args):
    q = Query(
        domain=parse_domain(args.domain),
        rel=args.rel,
        frm=args.frm,
        to=args.to,
        closure=args.closure,
        include_universal=args.universal,
    )
    result = session.query(q)
    if q.closure:
        return sorted(result)
    return records_json(result)


def cmd_multi(session: Session, args):
    constraints = [Constraint.parse(c) for c in args.constraint]
    found, counts = session.multi_constraint(parse_domain(args.domain), constraints)
    return {"candidates": sorted(found), "counts": counts}


def cmd_temporal(session: Session, args):
    return records_json(session.temporal(args.rel, parse_domain(args.before), parse_domain(args.scope)))


def cmd_reindex(session: Session, args):
    if args.domain:
        d = parse_domain(args.domain)
        return {"added": {d.raw: session.reindex(d)}}
    return session.reindex().to_json()


def cmd_bridge(session: Session, args):
    kb = session.kb
    if args.bridge_cmd == "add":
        out = []
        for rec in _read_records(args.source):
            if not isinstance(rec, BridgeRecord):
                raise FiberlogError("expected a bridge record with domain_1/domain_2")
            try:
                verdict = session.add_bridge(rec, args.rel or None)
            except UnknownConcept as exc:
                raise Rejected({"bridge": rec.to_json(), "verdict": "rejected",
                                "reason": "unknown_concept", "detail": str(exc)}) from None
            if verdict != "accepted":
                raise Rejected({"bridge": rec.to_json(), "verdict": verdict, "reason": "analogy_failed"})
            out.append({"bridge": rec.to_json(), "verdict": verdict})
        return out[0] if len(out) == 1 else out
    if args.bridge_cmd == "analogy":
        holds, witness = check_analogy(kb, args.a, parse_domain(args.d1), args.b, parse_domain(args.d2), args.rel)
        return {"holds": holds, "witness": sorted(list(w) for w in witness)}
    if args.bridge_cmd == "intersect":
        return sorted(cross_fiber_intersection(kb, parse_domain(args.d1), parse_domain(args.d2)))
    return records_json(cross_session_diff(kb, parse_domain(args.d1), parse_domain(args.d2), args.rel))


def cmd_save(session: Session, args):
    return {"saved": save_jsonl(session.kb, args.file), "path": args.file}


def cmd_audit(session: Session, args):
    return session.audit


def cmd_bench(args):
    if args.bench_cmd == "generate":
        spec = bench.GenSpec.from_json(_read_json_arg(args.spec))
        corpus = bench.generate(spec)
        if args.out is None:
            sys.stdout.write(corpus.to_jsonl())
            return None
        Path(args.out).write_text(corpus.to_jsonl(), encoding="utf-8")
        return {
            "path": args.out,
            "records": len(corpus.records),
            "target": corpus.target.raw,
            "constraints": [f"{c.rel}:{c.feature}" for c in corpus.constraints],
            "planted": sorted(corpus.planted),
            "funnel": corpus.funnel,
        }
    grid = _read_json_arg(args.grid) if args.grid else None
    report = bench.measure_scaling(grid, m=args.m, repeats=args.repeats)
    paths = bench.write_report(report, args.out_dir, figures=not args.no_figures)
    summary = {k: v for k, v in report.items() if k != "rows"}
    summary["outputs"] = paths
    return summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fiberlog", description="Domain-scoped inference over four-tuple JSONL data.")
    p.add_argument("--session", default=os.environ.get(SESSION_ENV), help=f"session directory (default ${SESSION_ENV})")
    p.add_argument("--data", action="append", default=[], metavar="FILE", help="JSONL file loaded before the command")
    p.add_argument("--config", help="JSON config with contradiction rules, applied at session start")
    p.add_argument("--end-session", action="store_true", help="release the meta-layer after this command")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("load", help="load JSONL files")
    s.add_argument("files", nargs="+")
    s.add_argument("--checked", action="store_true", help="validate every record on the way in")

    s = sub.add_parser("insert", help="validated insert of a JSON line or JSONL file")
    s.add_argument("source")
    s.add_argument("--unchecked", action="store_true", help="skip validation (bulk pre-validated data)")

    s = sub.add_parser("remove", help="retract records")
    s.add_argument("source")

    s = sub.add_parser("query", help="match or closure query inside one fiber")
    s.add_argument("--domain", required=True)
    s.add_argument("--from", dest="frm")
    s.add_argument("--rel")
    s.add_argument("--to")
    s.add_argument("--closure", action="store_true")
    s.add_argument("--universal", action="store_true", help="also read the @Universal fiber")

    s = sub.add_parser("multi", help="multi-constraint candidate reduction")
    s.add_argument("--domain", required=True)
    s.add_argument("--constraint", action="append", required=True, metavar="REL:FEATURE[:backward]")

    s = sub.add_parser("temporal", help="records strictly before a turn-ordered domain")
    s.add_argument("--rel", required=True)
    s.add_argument("--before", required=True)
    s.add_argument("--scope", required=True)

    s = sub.add_parser("reindex", help="typed inheritance into child fibers")
    s.add_argument("--domain")

    s = sub.add_parser("bridge", help="cross-domain operations")
    bsub = s.add_subparsers(dest="bridge_cmd", required=True)
    b = bsub.add_parser("add")
    b.add_argument("source")
    b.add_argument("--rel", action="append", help="relation signature for analogous_to")
    b = bsub.add_parser("analogy")
    b.add_argument("--a", required=True)
    b.add_argument("--d1", required=True)
    b.add_argument("--b", required=True)
    b.add_argument("--d2", required=True)
    b.add_argument("--rel", action="append", required=True)
    b = bsub.add_parser("intersect")
    b.add_argument("--d1", required=True)
    b.add_argument("--d2", required=True)
    b = bsub.add_parser("diff")
    b.add_argument("--d1", required=True)
    b.add_argument("--d2", required=True)
    b.add_argument("--rel", action="append", required=True)

    s = sub.add_parser("save", help="write the knowledge base as JSONL")
    s.add_argument("file")

    sub.add_parser("audit", help="dump the audit log")

    s = sub.add_parser("bench", help="synthetic corpora and scaling runs")
    bsub = s.add_subparsers(dest="bench_cmd", required=True)
    b = bsub.add_parser("generate")
    b.add_argument("--spec", required=True, help="GenSpec as JSON text or a JSON file")
    b.add_argument("--out")
    b = bsub.add_parser("scaling")
    b.add_argument("--grid", help="grid as JSON text or a JSON file")
    b.add_argument("-m", type=int, default=4)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--out-dir", default="bench_out")
    b.add_argument("--no-figures", action="store_true")
    return p


HANDLERS = {
    "insert": cmd_insert,
    "remove": cmd_remove,
    "query": cmd_query,
    "multi": cmd_multi,
    "temporal": cmd_temporal,
    "reindex": cmd_reindex,
    "bridge": cmd_bridge,
    "save": cmd_save,
    "audit": cmd_audit,
}


def _run(args) -> int:
    if args.cmd == "bench":
        result = cmd_bench(args)
        if result is not None:
            emit(result)
        return EXIT_OK

    store = SessionStore(args.session)
    state = store.state()
    kb = store.kb()
    old_audit = store.audit()
    active = state["active"]

    if args.config:
        if active:
            raise FiberlogError("session already active; contradiction rules load at session start")
        rules = load_rules(args.config)
    else:
        rules = [ContradictionRule(a, b) for a, b in state.get("contradictions", [])]

    preloaded = 0
    # before the session starts, new files may still carry meta records
    early = not active
    if early:
        preloaded += _add_files(kb, args.data)
        if args.cmd == "load" and not args.checked:
            preloaded += _add_files(kb, args.files)
    session = Session(kb, rules, audit=list(old_audit))
    if not early:
        preloaded += _add_files(kb, args.data)

    n_old = len(old_audit)
    keep_active = not args.end_session
    try:
        if args.cmd == "load":
            args.early = early
            result = cmd_load(session, args, preloaded)
        else:
            result = HANDLERS[args.cmd](session, args)
    except Rejected:
        # rejected writes still belong in the audit log
        store.persist(session, n_old, keep_active, rules)
        raise
    store.persist(session, n_old, keep_active, rules)
    emit(result)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except Rejected as rej:
        emit(rej.payload)
        return EXIT_REJECTED
    except OSError as exc:
        print(f"fiberlog: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FiberlogError, ValueError, json.JSONDecodeError) as exc:
        print(f"fiberlog: {exc}", file=sys.stderr)
        return EXIT_USAGE


run = main

if __name__ == "__main__":
    sys.exit(main())
