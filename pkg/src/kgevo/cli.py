"""Command-line interface: ``kgevo <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import __version__
from .community import GirvanNewman
from .embeddings import EmbeddingModel, TransE, entity_from_key, loss_trace_csv, matetee_sim, semantic_sim
from .events import EventConfig, classify_events
from .exceptions import KgevoError, UnknownVersion
from .metrics import metrics_report, subgraph_included
from .ontology import (
    OntologyChange,
    data_timestamp,
    evolutionary_dependency,
    evolutionary_sync,
    schema_series,
    series_to_csv,
)
from .perturb import MODES, PerturbConfig, perturb
from .properties import migration_graph, rank_properties, records_to_csv, relative_rates, type_migrations
from .rdf import canonical_serialize, read_ntriples
from .stats import FAMILIES, describe_evolution, extract_features, flag_noteworthy, local_noteworthy, type_index
from .store import ChangeSet, SnapshotMeta, VersionStore, parse_timestamp


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- I/O helpers


def _emit(args, text: str | bytes):
    data = text.encode("utf-8") if isinstance(text, str) else text
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _json(obj) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def _store(args, required=False) -> VersionStore | None:
    path = args.store or os.environ.get("KGEVO_STORE")
    if not path:
        if required:
            raise UsageError("no store given (use --store or set KGEVO_STORE)")
        return None
    return VersionStore(path, getattr(args, "chain_limit", 10), getattr(args, "max_delta_ratio", 0.5))


def _read_file(path: str, strict: bool = False) -> frozenset:
    triples, errors = read_ntriples(path, strict=strict)
    for e in errors:
        print(f"{path}: {e}", file=sys.stderr)
    return frozenset(triples)


def _load(args, ref: str):
    """Resolve a snapshot reference to ``(triples, meta)``.

    A reference is an N-Triples file, ``STORE_DIR@VERSION``, or a version id
    or label in the default store.
    """
    if os.path.isfile(ref):
        return _read_file(ref), None
    if "@" in ref:
        where, _, version = ref.rpartition("@")
        if os.path.isdir(where):
            st = VersionStore(where)
            vid = st.resolve(version)
            return st.materialize(vid), st.record(vid).meta
    st = _store(args)
    if st is None:
        raise UsageError(f"{ref!r} is not a file and no store is configured")
    vid = st.resolve(ref)
    return st.materialize(vid), st.record(vid).meta


def _read_iri_list(path: str | None) -> set[str] | None:
    if path is None:
        return None
    out = set()
    for line in Path(path).read_text("utf-8").splitlines():
        fields = line.split()
        if fields and not fields[0].startswith("#"):
            out.add(fields[0].strip("<>"))
    return out


def _fraction(upper_closed=False):
    """argparse type for a number in (0, 1), or (0, 1] when ``upper_closed``."""
    def convert(text):
        value = float(text)
        if not (0.0 < value < 1.0 or (upper_closed and value == 1.0)):
            raise argparse.ArgumentTypeError(f"{text} is outside (0, 1{']' if upper_closed else ')'}")
        return value
    return convert


# ----------------------------------------------------------------- subcommands


def cmd_parse(args):
    triples, errors = read_ntriples(args.file, strict=args.strict)
    for e in errors:
        print(f"{args.file}: {e}", file=sys.stderr)
    _emit(args, canonical_serialize(triples))


def cmd_commit(args):
    st = _store(args, required=True)
    triples = _read_file(args.file)
    ts = parse_timestamp(args.timestamp) if args.timestamp else datetime.now(timezone.utc)
    label = args.label or Path(args.file).name
    vid = st.commit(triples, SnapshotMeta(ts, label, args.source))
    _emit(args, vid + "\n")


def cmd_log(args):
    st = _store(args, required=True)
    _emit(args, _json([r.to_dict() for r in st.log()]))


def cmd_materialize(args):
    triples, _ = _load(args, args.version)
    _emit(args, canonical_serialize(triples))


def cmd_diff(args):
    old, _ = _load(args, args.old)
    new, _ = _load(args, args.new)
    _emit(args, ChangeSet.between(old, new).to_json())


def cmd_verify(args):
    st = _store(args, required=True)
    vid = st.resolve(args.version)
    if st.verify(vid):
        _emit(args, "OK\n")
        return 0
    print(f"FAILED: {vid} does not match its stored content", file=sys.stderr)
    _emit(args, "FAILED\n")
    return 2


def cmd_noteworthy(args):
    old, _ = _load(args, args.old)
    new, _ = _load(args, args.new)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    vectors = extract_features(ChangeSet.between(old, new), type_index(old), families)
    lines = []
    if not vectors:
        _emit(args, "")
        return
    if args.local:
        gn = GirvanNewman(predicates=_read_iri_list(args.predicates)).fit(old)
        per_comm = local_noteworthy(vectors, gn.partition_, args.theta)
        for cid in sorted(per_comm):
            for rep in per_comm[cid]:
                lines.extend(rep.json_lines(community=cid))
    else:
        for rep in flag_noteworthy(vectors, describe_evolution(vectors), args.theta):
            lines.extend(rep.json_lines())
    _emit(args, "".join(line + "\n" for line in lines))


def _communities(args, triples):
    gn = GirvanNewman(predicates=_read_iri_list(args.predicates), include_types=args.include_types)
    return gn.fit(triples)


def cmd_communities(args):
    triples, _ = _load(args, args.version)
    gn = _communities(args, triples)
    _emit(args, _json([c.as_dict() for c in gn.communities_]))


def cmd_events(args):
    old, _ = _load(args, args.old)
    new, _ = _load(args, args.new)
    ci = _communities(args, old).communities_
    cj = _communities(args, new).communities_
    events = classify_events(ci, cj, EventConfig(args.omega, args.basis))
    _emit(args, "".join(e.to_json() + "\n" for e in events))


def cmd_metrics(args):
    first, _ = _load(args, args.version)
    report = metrics_report(first, args.damping, args.tol)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "count"])
        w.writerows(report["degree_histogram"])
        _emit(args, buf.getvalue())
        return
    if args.other:
        second, _ = _load(args, args.other)
        other = metrics_report(second, args.damping, args.tol)
        nodes = sorted(set(report["pagerank"]) | set(other["pagerank"]))
        delta = {n: other["pagerank"].get(n, 0.0) - report["pagerank"].get(n, 0.0) for n in nodes}
        report = {
            "old": report,
            "new": other,
            "pagerank_delta": delta,
            "subgraph_included": subgraph_included(first, second),
        }
    _emit(args, _json(report))


def cmd_rank_properties(args):
    old, _ = _load(args, args.old)
    new, _ = _load(args, args.new)
    records, hist = rank_properties(ChangeSet.between(old, new), old, args.top)
    records = relative_rates(records, old)
    if not args.by_ratio:
        records.sort(key=lambda r: (-r.edited_count, r.property))
    if args.format == "csv":
        _emit(args, records_to_csv(records))
        return
    _emit(args, _json({
        "properties": [
            {"property": r.property, "added": r.added_count, "removed": r.removed_count,
             "edited": r.edited_count, "occurrence_old": r.occurrence_old,
             "ratio": "new" if r.ratio is None else r.ratio}
            for r in records
        ],
        "low_frequency": {str(k): v for k, v in hist.items()},
    }))


def cmd_type_dynamics(args):
    old, _ = _load(args, args.old)
    new, _ = _load(args, args.new)
    migrations = type_migrations(old, new, _read_iri_list(args.properties), args.min_count)
    if args.max_count is not None:
        migrations = [m for m in migrations if m.object_count <= args.max_count]
    _emit(args, _json(migration_graph(migrations)))


def _change_time(triples, meta, override):
    if override:
        return parse_timestamp(override)
    ts = data_timestamp(triples)
    if ts is None and meta is not None:
        ts = meta.timestamp
    if ts is None:
        raise UsageError("cannot determine change timestamp: no dct:modified in data; pass --t1/--t2")
    return ts


def cmd_onto_sync(args):
    changes = []
    for old_ref, new_ref, override in ((args.old1, args.new1, args.t1), (args.old2, args.new2, args.t2)):
        old, _ = _load(args, old_ref)
        new, meta = _load(args, new_ref)
        changes.append(OntologyChange(new_ref, _change_time(new, meta, override), ChangeSet.between(old, new)))
    res = evolutionary_sync(changes[0], changes[1], timedelta(days=args.threshold_days), args.ignore_builtins)
    _emit(args, _json({
        "es": res.es_seconds,
        "threshold": res.threshold_seconds,
        "synchronized": res.synchronized,
        "aligned": sorted(res.aligned_terms),
    }))


def _history(path: str) -> list[OntologyChange]:
    st = VersionStore(path)
    if not (Path(path) / "manifest.json").exists():
        raise UnknownVersion(f"{path} is not a store")
    records = st.log()
    out = []
    prev = st.materialize(records[0].id) if records else None
    for rec in records[1:]:
        cur = st.materialize(rec.id)
        ts = data_timestamp(cur) or rec.meta.timestamp
        out.append(OntologyChange(Path(path).name, ts, ChangeSet.between(prev, cur)))
        prev = cur
    return out


def cmd_onto_ed(args):
    res = evolutionary_dependency(_history(args.ontology), _history(args.external),
                                  timedelta(days=args.threshold_days), args.ignore_builtins)
    _emit(args, _json({"ec": res.externally_induced, "sc": res.ontology_specific, "ed": res.ed}))


def cmd_schema_series(args):
    st = _store(args, required=True)
    rows = schema_series((r.meta.timestamp, r.meta.label, st.materialize(r.id)) for r in st.log())
    _emit(args, series_to_csv(rows) if args.format == "csv" else _json(rows))


def _train(args, triples):
    return TransE(args.dim, args.margin, args.lr, args.epochs, args.seed).fit(triples)


def cmd_embed(args):
    triples, _ = _load(args, args.version)
    est = _train(args, triples)
    if args.loss_csv:
        Path(args.loss_csv).write_text(loss_trace_csv(est.loss_trace_), "utf-8")
    _emit(args, est.model_.to_json())


def _model(args, triples=None) -> EmbeddingModel:
    if args.model:
        return EmbeddingModel.from_json(Path(args.model).read_bytes())
    if triples is None:
        raise UsageError("--model is required")
    return _train(args, triples).model_


def cmd_simsem(args):
    v1, _ = _load(args, args.v1)
    v2, _ = _load(args, args.v2)
    report = semantic_sim(v1, v2, _model(args, v1))
    _emit(args, _json(report.as_dict()))


def cmd_matetee(args):
    model = _model(args)
    a, b = entity_from_key(args.a.strip("<>")), entity_from_key(args.b.strip("<>"))
    _emit(args, _json({"a": args.a, "b": args.b, "similarity": matetee_sim(a, b, model)}))


def cmd_perturb(args):
    triples, _ = _load(args, args.version)
    new, truth = perturb(triples, PerturbConfig(args.m, args.alpha, args.mode, args.seed))
    if args.truth:
        Path(args.truth).write_text(truth.to_json(), "utf-8")
    _emit(args, canonical_serialize(new))


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--store", help="store directory (default: $KGEVO_STORE)")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    communities = _Parser(add_help=False)
    communities.add_argument("--predicates", metavar="FILE", help="predicate allow-list, one IRI per line")
    communities.add_argument("--include-types", action="store_true", help="keep rdf:type edges")

    training = _Parser(add_help=False)
    training.add_argument("--dim", type=int, default=50)
    training.add_argument("--epochs", type=int, default=100)
    training.add_argument("--seed", type=int, default=0)
    training.add_argument("--lr", type=float, default=0.01)
    training.add_argument("--margin", type=float, default=1.0)

    parser = _Parser(prog="kgevo", description="Knowledge-graph versioning and evolution analytics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help, parents=()):
        p = sub.add_parser(name, help=help, parents=[common, *parents])
        p.set_defaults(func=func)
        return p

    p = add("parse", cmd_parse, "parse N-Triples and print the canonical serialization")
    p.add_argument("file")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")

    p = add("commit", cmd_commit, "commit an N-Triples file as a new version")
    p.add_argument("file")
    p.add_argument("--label")
    p.add_argument("--timestamp", help="ISO-8601 instant (default: now)")
    p.add_argument("--source")
    p.add_argument("--chain-limit", type=int, default=10)
    p.add_argument("--max-delta-ratio", type=float, default=0.5)

    add("log", cmd_log, "list committed versions")

    p = add("materialize", cmd_materialize, "print a version as canonical N-Triples")
    p.add_argument("version")

    p = add("diff", cmd_diff, "changeset between two versions")
    p.add_argument("old")
    p.add_argument("new")

    p = add("verify", cmd_verify, "check a version against its content hash")
    p.add_argument("version")

    p = add("noteworthy", cmd_noteworthy, "flag resources with unexpected change", [communities])
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--theta", type=_fraction(), default=0.05)
    p.add_argument("--local", action="store_true", help="use per-community statistics")
    p.add_argument("--families", default=",".join(FAMILIES),
                   help="comma-separated feature families: type, prop, typeprop")

    p = add("communities", cmd_communities, "Girvan-Newman communities of a version", [communities])
    p.add_argument("version")

    p = add("events", cmd_events, "community evolution events between two versions", [communities])
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--omega", type=_fraction(upper_closed=True), default=0.5)
    p.add_argument("--basis", choices=("triples", "nodes"), default="triples")

    p = add("metrics", cmd_metrics, "structural measures of one version, or two with deltas")
    p.add_argument("version")
    p.add_argument("other", nargs="?")
    p.add_argument("--damping", type=_fraction(), default=0.85)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = add("rank-properties", cmd_rank_properties, "rank properties by change frequency")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--top", type=int)
    p.add_argument("--by-ratio", action="store_true", help="order by relative change rate")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = add("type-dynamics", cmd_type_dynamics, "type migrations of objects per property")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--max-count", type=int)
    p.add_argument("--properties", metavar="FILE", help="restrict to these properties")

    p = add("onto-sync", cmd_onto_sync, "evolutionary synchronisation of two ontology changes")
    for name in ("old1", "new1", "old2", "new2"):
        p.add_argument(name)
    p.add_argument("--t1")
    p.add_argument("--t2")
    p.add_argument("--threshold-days", type=float, default=7.0)
    p.add_argument("--ignore-builtins", action="store_true")

    p = add("onto-ed", cmd_onto_ed, "evolutionary dependency of an ontology store on another")
    p.add_argument("ontology", help="store directory of the ontology")
    p.add_argument("external", help="store directory of its dependency")
    p.add_argument("--threshold-days", type=float, default=7.0)
    p.add_argument("--ignore-builtins", action="store_true")

    p = add("schema-series", cmd_schema_series, "class and subclass-axiom counts per version")
    p.add_argument("--format", choices=("json", "csv"), default="csv")

    p = add("embed", cmd_embed, "train TransE on a version", [training])
    p.add_argument("version")
    p.add_argument("--loss-csv", metavar="FILE")

    p = add("simsem", cmd_simsem, "embedding-based semantic similarity of two versions", [training])
    p.add_argument("v1")
    p.add_argument("v2")
    p.add_argument("--model", help="model JSON; trained on v1 when omitted")

    p = add("matetee", cmd_matetee, "1/(1+euclidean distance) between two entities")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--model", required=True)

    p = add("perturb", cmd_perturb, "random add/delete/update perturbation with ground truth")
    p.add_argument("version")
    p.add_argument("--m", type=int, required=True, help="number of target subjects")
    p.add_argument("--alpha", type=_fraction(), required=True, help="fraction of each subject's triples")
    p.add_argument("--mode", choices=MODES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", metavar="FILE", help="write the applied changeset here")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"kgevo {args.command}: {exc}", file=sys.stderr)
        return 1
    except (KgevoError, OSError, ValueError) as exc:
        print(f"kgevo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run(argv))
