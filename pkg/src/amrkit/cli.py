"""Single executable exposing the pipeline as subcommands.

All inputs and outputs are files (or stdout for the light textual
commands); every source of randomness flows from ``--seed``, so a rerun
with identical inputs and seed is byte-identical. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .classify import ClassifierConfig, run_cv_experiment, run_fixed_split_experiment
from .complexity import bin_and_score, group_conllu_by_text, profile_text, read_profiles, write_profiles
from .dataset import load_dataset
from .encoder import (
    EncoderConfig,
    load_params,
    read_embeddings,
    save_params,
    train_contrastive,
    write_embeddings,
)
from .errors import AmrkitError
from .graph import read_amr_blocks, serialize_penman
from .linearize import LinearizeOptions, linearize
from .smatch import graph_size, micro_average, smatch_exact, smatch_score
from .sts import run_sts

DEFAULT_SEED = 13

_FORMATS = {
    "amr": 'AMR file: PENMAN graphs separated by blank lines; "# ::id X" names a graph',
    "dataset": 'dataset: JSON object per line {id, text, amr?, text_b?, amr_b?, label?, score?, split?}',
    "emb": 'embeddings: JSON object per line {"id": str, "vector": [floats]}; pair element B is keyed "<id>::b"',
    "triplets": 'triplets: JSON object per line {"anchor": str, "positive": str, "negative": str}',
    "report": "report: one JSON object with config echo, per-trial metrics, mean, std, predictions",
    "profiles": "profiles: JSON object per line {id, fk_grade, mean_dep_distance, words, sentences, syllables}",
    "conllu": 'CoNLL-U: 10-column UD format; "# sent_id = <dataset-id>[-k]" ties sentences to examples',
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _out(path: str | None, content: str) -> None:
    if path is None:
        sys.stdout.write(content)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)


def _emb_sources(args) -> dict:
    sources = {}
    if getattr(args, "text_emb", None):
        sources["text"] = read_embeddings(args.text_emb)
    if getattr(args, "amr_emb", None):
        sources["amr"] = read_embeddings(args.amr_emb)
    if not sources:
        raise _Usage("pass --text-emb, --amr-emb, or both")
    return sources


class _Usage(Exception):
    pass


def cmd_parse(args) -> None:
    blocks = read_amr_blocks(args.infile)
    parts = []
    for i, (gid, g) in enumerate(blocks):
        parts.append(f"# ::id {gid if gid is not None else i}\n{serialize_penman(g)}\n")
    _out(args.out, "\n".join(parts))


def cmd_linearize(args) -> None:
    options = LinearizeOptions(
        keep_parens=not args.no_parens, keep_variables=args.keep_variables
    )
    blocks = read_amr_blocks(args.infile)
    lines = []
    for i, (gid, g) in enumerate(blocks):
        seq = linearize(g, options)
        lines.append(f"{gid if gid is not None else i}\t{seq.joined()}\n")
    _out(args.out, "".join(lines))


def cmd_smatch(args) -> None:
    blocks_a = read_amr_blocks(args.a)
    blocks_b = read_amr_blocks(args.b)
    ids_a = [gid for gid, _ in blocks_a]
    ids_b = [gid for gid, _ in blocks_b]
    if (
        all(g is not None for g in ids_a)
        and all(g is not None for g in ids_b)
        and set(ids_a) == set(ids_b)
        and len(set(ids_a)) == len(ids_a)
        and len(set(ids_b)) == len(ids_b)
    ):
        by_id = dict(blocks_b)
        pairs = [(gid, g, by_id[gid]) for gid, g in blocks_a]
    else:
        if len(blocks_a) != len(blocks_b):
            raise AmrkitError(
                f"cannot pair graphs: {len(blocks_a)} vs {len(blocks_b)} and ids do not align"
            )
        pairs = [
            (gid if gid is not None else str(i), ga, gb)
            for i, ((gid, ga), (_, gb)) in enumerate(zip(blocks_a, blocks_b))
        ]
    lines = []
    results = []
    sizes = []
    for label, ga, gb in pairs:
        r = smatch_exact(ga, gb) if args.exact else smatch_score(ga, gb, args.restarts, args.seed)
        results.append(r)
        sizes.append((graph_size(ga), graph_size(gb)))
        lines.append(f"{label}\tP={r.precision:.4f}\tR={r.recall:.4f}\tF1={r.f1:.4f}\n")
    p, rec, f1 = micro_average(results, sizes)
    lines.append(f"ALL\tP={p:.4f}\tR={rec:.4f}\tF1={f1:.4f}\n")
    _out(args.out, "".join(lines))


def cmd_featurize(args) -> None:
    from .pipeline import featurize_dataset

    dataset = load_dataset(args.dataset)
    emb = featurize_dataset(dataset, args.modality, args.pair_mode, args.dim, args.ngram)
    write_embeddings(emb, args.out)


def cmd_train_encoder(args) -> None:
    cfg = EncoderConfig(
        dim_in=args.dim_in,
        dim_out=args.dim_out,
        scale=args.scale,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    result = train_contrastive(args.triplets, cfg, mode=args.mode, ngram_max=args.ngram)
    save_params(result.params, args.out)
    for i, loss in enumerate(result.epoch_losses):
        sys.stdout.write(f"epoch {i}\tloss {loss:.6f}\n")


def cmd_embed(args) -> None:
    from .pipeline import featurize_dataset

    dataset = load_dataset(args.dataset)
    params = load_params(args.encoder)
    emb = featurize_dataset(
        dataset, args.modality, args.pair_mode, ngram_max=args.ngram, params=params
    )
    write_embeddings(emb, args.out)


def _classifier_config(args) -> ClassifierConfig:
    return ClassifierConfig(l2=args.l2, iterations=args.iterations, learning_rate=args.lr)


def cmd_cv(args) -> None:
    dataset = load_dataset(args.dataset)
    report = run_cv_experiment(
        dataset,
        _emb_sources(args),
        k=args.k,
        seed=args.seed,
        subsample=args.subsample,
        pair_mode=args.pair_mode,
        config=_classifier_config(args),
    )
    _out(args.out, report.to_json() + "\n")


def cmd_fixed_split(args) -> None:
    dataset = load_dataset(args.dataset)
    report = run_fixed_split_experiment(
        dataset,
        _emb_sources(args),
        positive_label=args.positive_label,
        trials=args.trials,
        base_seed=args.seed,
        pair_mode=args.pair_mode,
        config=_classifier_config(args),
    )
    _out(args.out, report.to_json() + "\n")


def cmd_sts(args) -> None:
    dataset = load_dataset(args.dataset)
    result = run_sts(dataset, _emb_sources(args))
    _out(args.out, result.to_json() + "\n")


def cmd_complexity(args) -> None:
    dataset = load_dataset(args.dataset)
    grouped = {}
    if args.conllu:
        grouped = group_conllu_by_text(args.conllu, set(dataset.ids()))
    profiles = [
        profile_text(ex.id, ex.text, grouped.get(ex.id)) for ex in dataset.examples
    ]
    write_profiles(profiles, args.out)


def cmd_bins(args) -> None:
    with open(args.report, encoding="utf-8") as fh:
        report = json.load(fh)
    profiles = read_profiles(args.profiles)
    result = bin_and_score(report["predictions"], profiles, args.metric, args.n_bins)
    _out(args.out, result.to_json() + "\n")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(result.to_csv())


def build_parser() -> _Parser:
    parser = _Parser(
        prog="amrkit",
        description="AMR parsing, linearization, embedding, and evaluation toolkit.",
        epilog="Formats: " + " | ".join(_FORMATS.values()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate an AMR file and emit canonical PENMAN",
                       description=_FORMATS["amr"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("linearize", help="emit one id<TAB>tokens line per graph",
                       description=f'{_FORMATS["amr"]}; output: "<id>\\t<space-joined tokens>"')
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--keep-variables", action="store_true")
    p.add_argument("--no-parens", action="store_true")
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("smatch", help="score graph pairs plus a corpus micro-average",
                       description=f'{_FORMATS["amr"]}; pairs by "::id" when both files carry full ids, else by position')
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_smatch)

    p = sub.add_parser("featurize", help="hash dataset fields into an embedding file",
                       description=f'{_FORMATS["dataset"]} -> {_FORMATS["emb"]}')
    p.add_argument("--dataset", required=True)
    p.add_argument("--modality", choices=["text", "amr"], required=True)
    p.add_argument("--pair-mode", choices=["joint", "elements"], default="joint")
    p.add_argument("--dim", type=int, default=32768)
    p.add_argument("--ngram", type=int, choices=[1, 2], default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train-encoder", help="train the contrastive linear encoder",
                       description=f'{_FORMATS["triplets"]}; values are raw text or PENMAN per --mode')
    p.add_argument("--triplets", required=True)
    p.add_argument("--mode", choices=["text", "amr"], default="text")
    p.add_argument("--dim-in", type=int, default=32768)
    p.add_argument("--dim-out", type=int, default=256)
    p.add_argument("--scale", type=float, default=20.0)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--ngram", type=int, choices=[1, 2], default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="encoder parameters (.npz)")
    p.set_defaults(func=cmd_train_encoder)

    p = sub.add_parser("embed", help="hash dataset fields and project through a trained encoder",
                       description=f'{_FORMATS["dataset"]} -> {_FORMATS["emb"]}')
    p.add_argument("--dataset", required=True)
    p.add_argument("--modality", choices=["text", "amr"], required=True)
    p.add_argument("--pair-mode", choices=["joint", "elements"], default="joint")
    p.add_argument("--encoder", required=True, help="parameters from train-encoder")
    p.add_argument("--ngram", type=int, choices=[1, 2], default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    for name, func, extra in (
        ("cv", cmd_cv, "stratified k-fold cross-validation, macro-F1"),
        ("fixed-split", cmd_fixed_split, "fixed train/test split, positive-class F1 over trials"),
    ):
        p = sub.add_parser(name, help=extra, description=f'{_FORMATS["dataset"]} -> {_FORMATS["report"]}')
        p.add_argument("--dataset", required=True)
        p.add_argument("--text-emb")
        p.add_argument("--amr-emb")
        p.add_argument("--pair-mode", choices=["joint", "elements"], default="joint")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--l2", type=float, default=1e-3)
        p.add_argument("--iterations", type=int, default=500)
        p.add_argument("--lr", type=float, default=0.5)
        p.add_argument("--out", required=True)
        if name == "cv":
            p.add_argument("--k", type=int, default=5)
            p.add_argument("--subsample", type=int)
        else:
            p.add_argument("--trials", type=int, default=5)
            p.add_argument("--positive-label", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("sts", help="cosine similarity vs gold scores, Spearman rho",
                       description=f'{_FORMATS["dataset"]} with score per pair -> JSON result; embeddings need "<id>" and "<id>::b" records')
    p.add_argument("--dataset", required=True)
    p.add_argument("--text-emb")
    p.add_argument("--amr-emb")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sts)

    p = sub.add_parser("complexity", help="per-example readability and dependency-distance profiles",
                       description=f'{_FORMATS["dataset"]} [+ {_FORMATS["conllu"]}] -> {_FORMATS["profiles"]}')
    p.add_argument("--dataset", required=True)
    p.add_argument("--conllu")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("bins", help="complexity-binned macro-F1 over stored predictions",
                       description=f'{_FORMATS["report"]} + {_FORMATS["profiles"]} -> JSON bins (+ optional CSV: bin_low,bin_high,count,macro_f1)')
    p.add_argument("--report", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--metric", choices=["fk", "mdd"], default="fk")
    p.add_argument("--n-bins", type=int, default=4)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bins)

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _Usage as exc:
        sys.stderr.write(f"amrkit {args.command}: error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"amrkit {args.command}: error: no such file: {exc.filename}\n")
        return 1
    except AmrkitError as exc:
        sys.stderr.write(f"amrkit {args.command}: error: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
