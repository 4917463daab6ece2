"""``vgae-embed``: train on a MaxCut corpus and export Encoding JSONL.

With ``--folds`` (a JSON instance_id -> fold map) one model is trained per
fold on the out-of-fold graphs, and each graph is embedded by the model
that never saw it; without it a single model is trained on everything.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .io import VgaeInputError, load_folds, load_graphs, write_embeddings
from .model import embed_graphs, train_vgae

log = logging.getLogger("vgae_embed")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="vgae-embed")
    parser.add_argument("--instances", required=True)
    parser.add_argument("--folds", help="JSON mapping instance_id -> fold index")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--out", required=True)
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        graphs = load_graphs(args.instances)
        if args.folds:
            fold_of = load_folds(args.folds)
            missing = [g.instance_id for g in graphs if g.instance_id not in fold_of]
            if missing:
                raise VgaeInputError(f"fold map missing ids: {missing[:5]}")
            embeddings = {}
            for fold in sorted(set(fold_of.values())):
                train = [g for g in graphs if fold_of[g.instance_id] != fold]
                test = [g for g in graphs if fold_of[g.instance_id] == fold]
                if not train or not test:
                    continue
                model = train_vgae(train, seed=args.seed, epochs=args.epochs)
                embeddings.update(embed_graphs(model, test))
                log.info("fold %d: trained on %d graphs, final loss %.4f",
                         fold, len(train), model.loss_history[-1])
        else:
            model = train_vgae(graphs, seed=args.seed, epochs=args.epochs)
            log.info("trained on %d graphs, loss %.4f -> %.4f", len(graphs),
                     model.loss_history[0], model.loss_history[-1])
            embeddings = embed_graphs(model, graphs)
        count = write_embeddings(args.out, embeddings)
        log.info("wrote %d embeddings to %s", count, args.out)
        return 0
    except VgaeInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
