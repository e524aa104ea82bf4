"""Small GRU encoder-decoder editor with beam-search decoding.

The model exists to make the /edit endpoint and its training loop real
at desk scale, not to chase output quality.  Tokens are whole words;
subword handling is deliberately out of scope.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import torch
from torch import nn

PAD = "<pad>"
BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)

ARTIFACT_FORMAT = "editor-v1"


class Vocab:
    """Word <-> id table; the four special tokens always occupy ids 0-3."""

    def __init__(self, words: Sequence[str]):
        self.itos: List[str] = list(SPECIALS) + [w for w in words if w not in SPECIALS]
        self.stoi: Dict[str, int] = {w: i for i, w in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @staticmethod
    def from_token_lists(token_lists: Sequence[Sequence[str]]) -> "Vocab":
        return Vocab(sorted({t for tokens in token_lists for t in tokens}))

    def encode(self, tokens: Sequence[str]) -> List[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(t, unk) for t in tokens]

    def decode(self, ids: Sequence[int]) -> List[str]:
        return [self.itos[i] for i in ids]


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_dim: int = 64
    hidden_dim: int = 128
    max_len: int = 30
    beam_size: int = 5


class Seq2SeqEditor(nn.Module):
    """Single-layer GRU encoder/decoder with a shared embedding table."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.embedding = nn.Embedding(config.vocab_size, config.embed_dim, padding_idx=0)
        self.encoder = nn.GRU(config.embed_dim, config.hidden_dim, batch_first=True)
        self.decoder = nn.GRU(config.embed_dim, config.hidden_dim, batch_first=True)
        self.out = nn.Linear(config.hidden_dim, config.vocab_size)

    def encode(self, src: torch.Tensor, lengths: Sequence[int]) -> torch.Tensor:
        packed = nn.utils.rnn.pack_padded_sequence(
            self.embedding(src), list(lengths), batch_first=True, enforce_sorted=False
        )
        _, hidden = self.encoder(packed)
        return hidden  # (1, batch, hidden_dim)

    def forward(self, src: torch.Tensor, src_lengths: Sequence[int],
                tgt_in: torch.Tensor) -> torch.Tensor:
        hidden = self.encode(src, src_lengths)
        outputs, _ = self.decoder(self.embedding(tgt_in), hidden)
        return self.out(outputs)  # (batch, tgt_len, vocab)


def beam_search(model: Seq2SeqEditor, vocab: Vocab, tokens: Sequence[str],
                beam_size: int | None = None, max_len: int | None = None) -> List[str]:
    """Highest mean-log-probability hypothesis, at most max_len tokens.

    Finished (EOS-terminated) hypotheses are preferred over unfinished
    ones of equal score; the PAD token is never emitted.
    """
    if not tokens:
        return []
    beam_size = beam_size or model.config.beam_size
    max_len = max_len if max_len is not None else model.config.max_len
    model.eval()
    bos, eos, pad = vocab.stoi[BOS], vocab.stoi[EOS], vocab.stoi[PAD]
    with torch.no_grad():
        src = torch.tensor([vocab.encode(tokens)], dtype=torch.long)
        hidden = model.encode(src, [len(tokens)])

        def mean_score(ids: List[int], logprob: float) -> float:
            return logprob / max(len(ids) - 1, 1)

        beams: List[Tuple[List[int], float, torch.Tensor, bool]] = [([bos], 0.0, hidden, False)]
        for _ in range(max_len):
            expansions: List[Tuple[List[int], float, torch.Tensor, bool]] = []
            for ids, logprob, hid, done in beams:
                if done:
                    expansions.append((ids, logprob, hid, True))
                    continue
                step_in = torch.tensor([[ids[-1]]], dtype=torch.long)
                out, new_hid = model.decoder(model.embedding(step_in), hid)
                logprobs = torch.log_softmax(model.out(out[0, -1]), dim=-1)
                top = torch.topk(logprobs, min(beam_size + 1, len(vocab)))
                for lp, idx in zip(top.values.tolist(), top.indices.tolist()):
                    if idx == pad:
                        continue
                    expansions.append((ids + [idx], logprob + lp, new_hid, idx == eos))
            expansions.sort(key=lambda b: mean_score(b[0], b[1]), reverse=True)
            beams = expansions[:beam_size]
            if all(b[3] for b in beams):
                break
        best = max(beams, key=lambda b: (b[3], mean_score(b[0], b[1])))
    ids = best[0][1:]
    if ids and ids[-1] == eos:
        ids = ids[:-1]
    return vocab.decode(ids[:max_len])


def save_artifact(path: str | Path, model: Seq2SeqEditor, vocab: Vocab) -> None:
    torch.save(
        {
            "format": ARTIFACT_FORMAT,
            "vocab": vocab.itos,
            "config": asdict(model.config),
            "state": model.state_dict(),
        },
        path,
    )


def load_artifact(path: str | Path) -> Tuple[Seq2SeqEditor, Vocab]:
    try:
        payload = torch.load(path, map_location="cpu")
    except Exception as exc:  # torch raises a zoo of types here
        raise ValueError(f"cannot load editor artifact {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != ARTIFACT_FORMAT:
        raise ValueError(f"{path}: not a {ARTIFACT_FORMAT} artifact")
    itos = list(payload["vocab"])
    if itos[: len(SPECIALS)] != list(SPECIALS):
        raise ValueError(f"{path}: artifact vocabulary lost its special tokens")
    vocab = Vocab(itos[len(SPECIALS):])
    model = Seq2SeqEditor(ModelConfig(**payload["config"]))
    model.load_state_dict(payload["state"])
    model.eval()
    return model, vocab
