"""Train the /edit seq2seq model from (source -> target) token pairs.

Input is TSV, one pair per line, source TAB target, each side
space-joined tokens — the format the redactor `synth-edit` command
writes.  Per-epoch losses stream to stderr as JSON lines; the final
summary goes to stdout; the artifact is loadable by the server's
--editor-model flag.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import torch
from torch import nn

from .seq2seq import BOS, EOS, ModelConfig, Seq2SeqEditor, Vocab, save_artifact

Pair = Tuple[List[str], List[str]]
Batch = Tuple[torch.Tensor, List[int], torch.Tensor, torch.Tensor]


def load_pairs(path: str | Path) -> List[Pair]:
    pairs: List[Pair] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected source<TAB>target")
            source, target = line.split("\t", 1)
            src, tgt = source.split(), target.split()
            if not src or not tgt:
                raise ValueError(f"{path}:{lineno}: empty pair side")
            pairs.append((src, tgt))
    return pairs


def make_batches(pairs: Sequence[Pair], vocab: Vocab, batch_size: int,
                 max_len: int, rng: random.Random) -> Iterator[Batch]:
    """Shuffled, padded teacher-forcing batches (tgt_in = BOS + y, tgt_out = y + EOS)."""
    bos, eos, pad = vocab.stoi[BOS], vocab.stoi[EOS], 0
    order = list(range(len(pairs)))
    rng.shuffle(order)

    def padded(rows: List[List[int]]) -> torch.Tensor:
        width = max(len(r) for r in rows)
        return torch.tensor([r + [pad] * (width - len(r)) for r in rows], dtype=torch.long)

    for start in range(0, len(order), batch_size):
        chunk = [pairs[i] for i in order[start:start + batch_size]]
        src_ids = [vocab.encode(s[:max_len]) for s, _ in chunk]
        tgt_ids = [vocab.encode(t[:max_len]) for _, t in chunk]
        yield (
            padded(src_ids),
            [len(r) for r in src_ids],
            padded([[bos] + r for r in tgt_ids]),
            padded([r + [eos] for r in tgt_ids]),
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="train-editor",
        description="Train the seq2seq editor served on /edit.",
    )
    parser.add_argument("--pairs", required=True, help="TSV of source<TAB>target token pairs")
    parser.add_argument("--out", required=True, help="artifact output path")
    parser.add_argument("--lr", type=float, default=1e-4)
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--max-len", type=int, default=30)
    parser.add_argument("--beam", type=int, default=5,
                        help="beam size stored as the artifact's decoding default")
    parser.add_argument("--embed-dim", type=int, default=64)
    parser.add_argument("--hidden-dim", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        pairs = load_pairs(args.pairs)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not pairs:
        print(f"error: no training pairs in {args.pairs}", file=sys.stderr)
        return 1

    torch.manual_seed(args.seed)
    rng = random.Random(args.seed)
    vocab = Vocab.from_token_lists([s for s, _ in pairs] + [t for _, t in pairs])
    config = ModelConfig(
        vocab_size=len(vocab), embed_dim=args.embed_dim, hidden_dim=args.hidden_dim,
        max_len=args.max_len, beam_size=args.beam,
    )
    model = Seq2SeqEditor(config)
    optimizer = torch.optim.Adam(model.parameters(), lr=args.lr)
    criterion = nn.CrossEntropyLoss(ignore_index=0)

    model.train()
    final_loss = 0.0
    for epoch in range(1, args.epochs + 1):
        total, batches = 0.0, 0
        for src, src_lengths, tgt_in, tgt_out in make_batches(
            pairs, vocab, args.batch, args.max_len, rng
        ):
            optimizer.zero_grad()
            logits = model(src, src_lengths, tgt_in)
            loss = criterion(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            batches += 1
        final_loss = total / batches
        print(json.dumps({"epoch": epoch, "loss": round(final_loss, 6)}), file=sys.stderr)

    try:
        save_artifact(args.out, model, vocab)
    except OSError as exc:
        print(f"error: cannot write artifact {args.out}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({
        "pairs": len(pairs),
        "vocab": len(vocab),
        "epochs": args.epochs,
        "final_loss": round(final_loss, 6),
        "artifact": str(args.out),
    }))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
