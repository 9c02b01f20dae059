"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 malformed input (parse/decode),
3 I/O failure. Outputs are written to a temp file and renamed into place, so
a failed run never leaves a partial file behind. ``KGE_LOG`` sets the log
level (default WARNING).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from collections import Counter
from typing import Sequence

from . import analysis
from .dictionary import Dictionary, atomic_write
from .ingest import RDF_TYPE, NTriplesParser, Term, ParseError, Triple, open_source, serialize_ntriples
from .pipeline import FREQ_METHODS, Config, UnknownIdError, count_partitions, decode, encode, frequency_estimates
from .synth import GenSpec, write_ntriples
from .varint import VarintError, read_encoded_triples, write_encoded_triples

EXIT_USAGE, EXIT_PARSE, EXIT_IO = 1, 2, 3

logger = logging.getLogger("kgencode")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="N-Triples file, optionally gzipped")
    p.add_argument("--k", type=int, default=50, help="top-k threshold (default 50)")
    p.add_argument("--hashes", type=int, default=3, help="Count-Min hash functions (default 3)")
    p.add_argument("--width", type=int, default=1 << 20, help="counters per Count-Min array")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--partitions", type=int, default=None, help="input partitions (default: --workers)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--freq-method", choices=FREQ_METHODS, default="cmmg")
    p.add_argument("--sample-rate", type=float, default=0.05)
    p.add_argument("--skip-bad-lines", action="store_true", help="skip malformed lines instead of failing")


def _config(args: argparse.Namespace) -> Config:
    try:
        return Config(
            k=args.k,
            n_hash=args.hashes,
            width=args.width,
            workers=args.workers,
            partitions=args.partitions,
            seed=args.seed,
            freq_method=args.freq_method,
            sample_rate=args.sample_rate,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args: argparse.Namespace) -> list[Triple]:
    parser = NTriplesParser("skip" if args.skip_bad_lines else "abort")
    with open_source(args.input) as stream:
        triples = list(parser.parse(stream))
    if parser.error_count:
        logger.warning("skipped %d malformed lines", parser.error_count)
    return triples


def cmd_encode(args: argparse.Namespace) -> int:
    config = _config(args)
    triples = _load(args)
    result = encode(triples, config)
    result.dictionary.save(args.out_dict)
    with atomic_write(args.out_data, "wb") as fh:
        write_encoded_triples(fh, result.ids)
    if args.out_sketch and result.sketch is not None:
        with atomic_write(args.out_sketch, "wb") as fh:
            result.sketch.save(fh)
    if args.out_taxonomy:
        with atomic_write(args.out_taxonomy, "w") as fh:
            result.taxonomy.dump(fh)
    stats = json.dumps(result.stats, indent=2, sort_keys=True)
    if args.stats:
        with atomic_write(args.stats, "w") as fh:
            fh.write(stats + "\n")
    else:
        print(stats)
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    dictionary = Dictionary.load(args.dict)
    with open(args.data, "rb") as fh:
        ids = read_encoded_triples(fh)
    text = serialize_ntriples(decode(ids, dictionary))
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with atomic_write(args.output, "w") as fh:
            fh.write(text)
    return 0


def cmd_topk(args: argparse.Namespace) -> int:
    config = _config(args)
    triples = _load(args)
    sketches, _ = count_partitions(triples, config)
    estimates, _ = frequency_estimates(triples, config, sketches)
    exact = Counter(t for tr in triples for t in tr) if args.with_exact else None
    out = sys.stdout
    header = ["rank", "term", "estimate"] + (["exact"] if exact is not None else [])
    out.write("\t".join(header) + "\n")
    for rank, e in enumerate(estimates[: config.k], start=1):
        row = [str(rank), e.term.n3(), str(e.estimate)]
        if exact is not None:
            row.append(str(exact[e.term]))
        out.write("\t".join(row) + "\n")
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(
        n_distinct=args.n_distinct,
        s=args.s,
        F=args.occurrences,
        classes=args.classes,
        seed=args.seed,
        depth=args.depth,
        law=args.law,
    )
    if args.output in (None, "-"):
        write_ntriples(spec, sys.stdout)
    else:
        with atomic_write(args.output, "w") as fh:
            write_ntriples(spec, fh)
    return 0


def compare_rows(triples: Sequence[Triple], config: Config, join: tuple[str, str] | None = None) -> list[dict]:
    """One report row per encoder; the bit-model columns depend only on the data."""
    table = analysis.FrequencyTable.from_triples(triples)
    fix, kog = analysis.s_fix(table), analysis.s_kog(table)
    pair = join_pair(triples) if join is None else tuple(Term.iri(p) for p in join)
    dictionaries = {
        "kognac": encode(triples, config).dictionary,
        "order": analysis.order_based_encode(triples),
        "hash": analysis.hash_based_encode(triples, config.seed),
        "syntactic": analysis.syntactic_encode(triples),
    }
    rows = []
    for name, d in dictionaries.items():
        ids = analysis.to_ids(triples, d)
        locality = None
        if pair is not None:
            try:
                locality = analysis.measure_join_locality(ids, (d.id_of(pair[0]), d.id_of(pair[1])))
            except KeyError as exc:
                raise UsageError(f"join predicate not found: {exc}") from None
        rows.append(
            dict(
                encoder=name,
                dict_entries=len(d),
                encoded_bytes=analysis.encoded_size(ids),
                s_fix_bits=fix,
                s_kog_bits=kog,
                locality_ratio="" if locality is None else f"{locality:.6f}",
            )
        )
    return rows


def join_pair(triples: Sequence[Triple]):
    """The two most frequent non-``rdf:type`` predicates sharing a subject."""
    subjects: dict = {}
    counts: Counter = Counter()
    for s, p, _ in triples:
        if p == RDF_TYPE:
            continue
        counts[p] += 1
        subjects.setdefault(p, set()).add(s)
    ranked = [p for p, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]
    for i, a in enumerate(ranked):
        for b in ranked[i + 1:]:
            if subjects[a] & subjects[b]:
                return a, b
    return (ranked[0], ranked[0]) if ranked else None


def cmd_compare(args: argparse.Namespace) -> int:
    config = _config(args)
    triples = _load(args)
    rows = compare_rows(triples, config, tuple(args.join) if args.join else None)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.output in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with atomic_write(args.output, "w") as fh:
            fh.write(buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kgencode", description="Dictionary encoding for RDF knowledge graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="build the dictionary and the encoded triple file")
    _add_config_flags(p)
    p.add_argument("--out-dict", required=True)
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-sketch", help="also save the merged sketch state")
    p.add_argument("--out-taxonomy", help="also dump the class taxonomy")
    p.add_argument("--stats", help="write stats JSON here instead of stdout")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="turn an encoded triple file back into N-Triples")
    p.add_argument("--dict", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("topk", help="print the most frequent terms")
    _add_config_flags(p)
    p.add_argument("--with-exact", action="store_true", help="add exact counts as a column")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("gen", help="generate a synthetic N-Triples fixture")
    p.add_argument("--n-distinct", type=int, default=10_000)
    p.add_argument("--s", type=float, default=2.0, help="Zipf skew")
    p.add_argument("--occurrences", "--F", type=int, default=30_000, help="total term occurrences")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--depth", type=int, default=3, help="taxonomy depth")
    p.add_argument("--law", choices=analysis.ZIPF_LAWS, default="geometric")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compare", help="CSV report comparing encoders")
    _add_config_flags(p)
    p.add_argument("--join", nargs=2, metavar=("P1", "P2"), help="predicate IRIs for the locality metric")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("KGE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kgencode: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"kgencode: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except VarintError as exc:
        print(f"kgencode: decode error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnknownIdError as exc:
        print(f"kgencode: decode error: unknown id {exc.tid}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"kgencode: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"kgencode: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
