"""Command-line entry point.

    geol run --config task.json [--relation R] [--output PATH] [--cache-dir DIR]
             [--dry-run] [--quiet] [--workers N]
    geol serve [--host H] [--port P] [--cache-dir DIR]

``geol --config task.json`` is shorthand for ``geol run``. Progress lines go
to standard error as ``phase done/total``. Exit status: 0 success, 1
configuration or usage error, 2 endpoint or storage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from geol import __version__
from geol.cache import CacheStore
from geol.config import load_config
from geol.engine import run
from geol.errors import ConfigError, EndpointError, StorageError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    # usage errors share the config-error exit status
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geol", description="Topological link discovery over SPARQL endpoints.")
    parser.add_argument("--version", action="version", version=f"geol {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    r = sub.add_parser("run", help="run one link task")
    r.add_argument("--config", required=True, help="task configuration (JSON)")
    r.add_argument("--relation", help="override the configured relation")
    r.add_argument("--output", help='override the output path ("inline" writes to stdout)')
    r.add_argument("--cache-dir", help="override the cache directory")
    r.add_argument("--dry-run", action="store_true", help="validate the configuration only")
    r.add_argument("--quiet", action="store_true", help="suppress progress output")
    r.add_argument("--workers", type=int, help="linking processes (default: CPU count)")

    s = sub.add_parser("serve", help="start the REST job service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.add_argument("--cache-dir", help="cache directory for all jobs")
    return parser


def _run(args) -> int:
    try:
        config = load_config(args.config).with_overrides(
            relation=args.relation, output=args.output, cache_dir=args.cache_dir)
    except ConfigError as exc:
        print(f"geol: invalid configuration {args.config}:", file=sys.stderr)
        for p in exc.problems:
            print(f"  {p}", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers is not None and args.workers < 1:
        print("geol: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        if not args.quiet:
            print(f"configuration ok: {config.relation.value}, output {config.output}",
                  file=sys.stderr)
        return EXIT_OK

    progress = None if args.quiet else (lambda ev: print(ev, file=sys.stderr, flush=True))
    destination = sys.stdout.buffer if config.output == "inline" else config.output
    try:
        with CacheStore(config.cache_dir) as store:
            mapping = run(config.to_task(), progress, store=store,
                          destination=destination, workers=args.workers)
    except (EndpointError, StorageError) as exc:
        phase = getattr(exc, "phase", None)
        where = f" during {phase}" if phase else ""
        print(f"geol: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"geol: cannot write links: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if destination is sys.stdout.buffer:
        sys.stdout.flush()
    if not args.quiet:
        st = mapping.stats
        print(f"{st['links_found']} links; excluded {len(mapping.excluded_on('source'))} source "
              f"and {len(mapping.excluded_on('target'))} target geometries", file=sys.stderr)
    return EXIT_OK


def _serve(args) -> int:
    from geol.service import serve
    serve(args.host, args.port, cache_dir=args.cache_dir)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("--help", "--version"):
        argv.insert(0, "run")
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="geol: %(levelname)s: %(message)s")
    if args.command == "run":
        return _run(args)
    if args.command == "serve":
        return _serve(args)
    parser.print_help(sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
