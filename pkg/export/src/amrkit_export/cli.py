"""CLI for the embedding exporter."""

from __future__ import annotations

import argparse
import sys

from .exporter import DEFAULT_MODEL, FIELDS, ExportError, ExportJob, export_embeddings


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="amrkit-export",
        description=(
            "Embed a dataset field with a pretrained sentence encoder and write "
            'the amrkit embedding format: {"id": str, "vector": [floats]} per line.'
        ),
    )
    parser.add_argument("--dataset", required=True, help="newline-delimited JSON examples")
    parser.add_argument("--field", choices=list(FIELDS), default="text")
    parser.add_argument(
        "--model",
        default=DEFAULT_MODEL,
        help="sentence-transformers model id, or hash://<dim> for the offline encoder",
    )
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument(
        "--parser-cmd",
        help="command filling missing AMR fields; gets a JSONL path of {id, text}, "
        "prints an AMR file with matching ::id lines",
    )
    parser.add_argument("--amrkit-bin", default="amrkit", help="main toolkit executable")
    parser.add_argument("--out", required=True)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        dataset=args.dataset,
        field=args.field,
        model=args.model,
        out=args.out,
        batch_size=args.batch_size,
        parser_cmd=args.parser_cmd,
        amrkit_bin=args.amrkit_bin,
    )
    try:
        count = export_embeddings(job)
    except FileNotFoundError as exc:
        sys.stderr.write(f"amrkit-export: error: no such file: {exc.filename}\n")
        return 1
    except ExportError as exc:
        sys.stderr.write(f"amrkit-export: error: {exc}\n")
        return 2
    sys.stderr.write(f"amrkit-export: wrote {count} records to {args.out}\n")
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
