"""Part-of-speech tagging over the 17 universal tags, plus the BW sentinel.

BW marks positions holding restricted words; it is never produced by a
tagger and only enters a sequence through substitute_bw.  The built-in
tagger is a deterministic lexicon + suffix-rule affair: closed-class
lookups first, then a small content lexicon, then suffix heuristics,
with NOUN as the fallback.  Accuracy affects output quality, never
pipeline correctness, and identical input always yields identical tags.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Protocol, Sequence, Tuple

import requests

from .corpus import LabeledSentence, RestrictedVocab, is_restricted

UPOS_TAGS = frozenset(
    "ADJ ADP ADV AUX CCONJ DET INTJ NOUN NUM PART PRON PROPN PUNCT SCONJ SYM VERB X".split()
)
BW = "BW"
ALL_TAGS = UPOS_TAGS | {BW}


class InvalidToken(ValueError):
    """Raised when a sentence contains an empty or whitespace-only token."""


class TaggerError(Exception):
    """Raised when a tagging backend fails or misbehaves."""


class Tagger(Protocol):
    def tag(self, tokens: Sequence[str]) -> List[str]:
        """Return one tag per token."""
        ...


# --- built-in rule tagger ---------------------------------------------------

_DET = {
    "the", "a", "an", "this", "that", "these", "those", "every", "each",
    "some", "any", "no", "another", "such", "which", "whose", "all", "both",
    "either", "neither", "my", "your", "his", "her", "its", "our", "their",
    "what",
}
_PRON = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
    "myself", "yourself", "himself", "herself", "itself", "ourselves",
    "yourselves", "themselves", "who", "whom", "mine", "yours", "hers",
    "ours", "theirs", "someone", "anyone", "everyone", "nobody", "somebody",
    "anybody", "everybody", "nothing", "something", "anything", "everything",
    "none", "one",
}
_AUX = {
    "am", "is", "are", "was", "were", "be", "been", "being", "do", "does",
    "did", "have", "has", "had", "will", "would", "shall", "should", "can",
    "could", "may", "might", "must", "ought",
}
_ADP = {
    "in", "on", "at", "by", "for", "with", "about", "against", "between",
    "into", "through", "during", "before", "after", "above", "below", "to",
    "from", "of", "off", "over", "under", "near", "without", "within",
    "along", "across", "behind", "beyond", "around", "among", "upon",
    "toward", "towards", "onto", "inside", "outside", "via", "per", "up",
    "down", "out",
}
_PART = {"not", "n't"}
_CCONJ = {"and", "or", "but", "nor", "yet", "&"}
_SCONJ = {"if", "because", "while", "although", "though", "since",
          "whereas", "unless", "until", "than", "as", "whether", "when"}
_INTJ = {"oh", "wow", "hey", "ouch", "oops", "yeah", "yes", "hmm", "ah",
         "ugh", "lol", "omg", "hello", "hi", "please"}

_VERB_WORDS = {
    "be", "have", "do", "say", "go", "get", "make", "know", "think", "take",
    "see", "come", "want", "look", "use", "find", "give", "tell", "work",
    "call", "try", "ask", "need", "feel", "become", "leave", "put", "mean",
    "keep", "let", "begin", "run", "seem", "help", "talk", "turn", "start",
    "show", "hear", "play", "move", "like", "live", "believe", "hold",
    "bring", "happen", "write", "sit", "stand", "lose", "pay", "meet",
    "continue", "set", "learn", "change", "lead", "watch", "follow", "stop",
    "speak", "read", "allow", "add", "spend", "grow", "open", "walk", "win",
    "offer", "remember", "love", "consider", "buy", "wait", "serve", "die",
    "send", "expect", "build", "stay", "fall", "cut", "reach", "kill",
    "eat", "sow", "reap", "shut", "bark", "sleep", "jump", "sing", "dance",
    "drink", "drive", "smile", "laugh", "cry", "miss", "hate", "throw",
}
_NOUN_WORDS = {
    "dog", "cat", "time", "people", "way", "day", "man", "thing", "woman",
    "life", "child", "world", "school", "state", "family", "student",
    "group", "country", "problem", "hand", "part", "place", "case", "week",
    "company", "system", "question", "night", "point", "home", "water",
    "room", "mother", "father", "money", "story", "month", "book", "eye",
    "job", "word", "business", "side", "kind", "head", "house", "friend",
    "hour", "game", "line", "end", "car", "city", "name", "team", "minute",
    "idea", "kid", "body", "face", "door", "health", "person", "art",
    "war", "party", "result", "morning", "reason", "girl", "guy", "moment",
    "air", "teacher", "food", "bird", "tree", "street", "road", "sun",
    "moon", "star", "hell", "heck", "clown", "clowns", "fool", "fools",
}
_ADJ_WORDS = {
    "good", "bad", "big", "small", "old", "new", "young", "long", "short",
    "high", "low", "hot", "cold", "happy", "sad", "loud", "quiet", "dumb",
    "smart", "great", "little", "own", "other", "right", "wrong", "same",
    "different", "nice", "fine", "real", "sure", "free", "full", "hard",
    "easy", "late", "early", "clear", "dark", "dead", "deep", "fast",
    "slow", "poor", "rich", "strong", "weak", "true", "false", "warm",
    "wild", "mad", "angry", "stupid", "silly", "crazy", "ugly", "pretty",
    "red", "blue", "green", "black", "white", "tired", "busy", "lazy",
}
_ADV_WORDS = {
    "very", "too", "also", "just", "now", "then", "here", "there", "well",
    "really", "never", "always", "often", "again", "soon", "still", "even",
    "only", "quite", "rather", "almost", "already", "maybe", "perhaps",
    "together", "away", "back", "once", "twice", "so", "how", "why",
    "where", "today", "tomorrow", "yesterday",
}

_CLOSED = (
    (_DET, "DET"), (_PRON, "PRON"), (_AUX, "AUX"), (_ADP, "ADP"),
    (_PART, "PART"), (_CCONJ, "CCONJ"), (_SCONJ, "SCONJ"), (_INTJ, "INTJ"),
)

_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity", "ship", "hood",
                  "ism", "ance", "ence", "dom", "logy")
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "ish", "less", "est",
                 "ic", "al")
_VERB_SUFFIXES = ("ize", "ise", "ate", "ify")

_PUNCT_CHARS = set(".,!?;:'\"()[]{}<>-–—…/\\`´’‘“”*")
_SYM_CHARS = set("$%€£¥+=^~#@|&_")


class BuiltinTagger:
    """Deterministic rule tagger; no model files, no randomness."""

    def tag(self, tokens: Sequence[str]) -> List[str]:
        return [self._tag_one(tok, pos) for pos, tok in enumerate(tokens)]

    def _tag_one(self, token: str, position: int) -> str:
        if all(ch in _PUNCT_CHARS for ch in token):
            return "PUNCT"
        if any(ch.isdigit() for ch in token):
            return "NUM"
        if all(ch in _SYM_CHARS for ch in token):
            return "SYM"
        low = token.lower()
        for words, tag in _CLOSED:
            if low in words:
                return tag
        if position > 0 and token[0].isupper():
            return "PROPN"
        if low in _ADJ_WORDS:
            return "ADJ"
        if low in _ADV_WORDS:
            return "ADV"
        if low in _VERB_WORDS:
            return "VERB"
        if low in _NOUN_WORDS:
            return "NOUN"
        return self._by_suffix(low)

    def _by_suffix(self, low: str) -> str:
        if low.endswith("ly") and len(low) > 3:
            return "ADV"
        if (low.endswith("ing") or low.endswith("ed")) and len(low) > 4:
            return "VERB"
        if low.endswith(_NOUN_SUFFIXES):
            return "NOUN"
        if low.endswith(_ADJ_SUFFIXES) and len(low) > 4:
            return "ADJ"
        if low.endswith(_VERB_SUFFIXES) and len(low) > 4:
            return "VERB"
        if low.endswith("s") and not low.endswith("ss") and len(low) > 3:
            stem = low[:-1]
            if stem.endswith("e") and stem[:-1] in _VERB_WORDS:
                return "VERB"
            if stem in _VERB_WORDS:
                return "VERB"
            return "NOUN"
        return "NOUN"


class RemoteTagger:
    """Client for a POST /tag service: {"tokens": [...]} -> {"tags": [...]}.

    Unknown tags from the service map to X with a warning.  Requests are
    serialized with a per-call timeout; failures raise TaggerError naming
    the endpoint.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def tag(self, tokens: Sequence[str]) -> List[str]:
        url = f"{self.endpoint}/tag"
        try:
            resp = requests.post(url, json={"tokens": list(tokens)}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TaggerError(f"tag service unreachable at {url}: {exc}") from exc
        if resp.status_code != 200:
            raise TaggerError(f"tag service at {url} returned {resp.status_code}")
        try:
            tags = resp.json()["tags"]
        except (ValueError, KeyError) as exc:
            raise TaggerError(f"malformed response from {url}: {exc}") from exc
        out = []
        for tag in tags:
            if tag not in UPOS_TAGS:
                warnings.warn(f"unknown tag {tag!r} from {url}; mapping to X")
                tag = "X"
            out.append(tag)
        return out


@dataclass(frozen=True)
class TaggedSentence:
    """A labeled sentence plus one tag per token.

    After substitute_bw, tags[j] == BW exactly where tokens[j] is
    restricted.
    """

    id: str
    tokens: Tuple[str, ...]
    label: str
    tags: Tuple[str, ...]

    def __post_init__(self):
        if len(self.tags) != len(self.tokens):
            raise ValueError(
                f"{self.id}: {len(self.tags)} tags for {len(self.tokens)} tokens"
            )

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "tokens": list(self.tokens),
            "label": self.label,
            "tags": list(self.tags),
        }

    @property
    def pos_sequence(self) -> Tuple[str, ...]:
        return self.tags


def tag_sentence(sentence: LabeledSentence, tagger: Tagger) -> TaggedSentence:
    """Tag every token; empty or whitespace-only tokens are invalid."""
    if not sentence.tokens:
        raise InvalidToken(f"{sentence.id}: empty sentence")
    for tok in sentence.tokens:
        if not tok or tok.strip() == "":
            raise InvalidToken(f"{sentence.id}: empty token in {sentence.tokens!r}")
    tags = list(tagger.tag(sentence.tokens))
    if len(tags) != len(sentence.tokens):
        raise TaggerError(
            f"tagger returned {len(tags)} tags for {len(sentence.tokens)} tokens"
        )
    return TaggedSentence(sentence.id, sentence.tokens, sentence.label, tuple(tags))


def substitute_bw(tagged: TaggedSentence, vocab: RestrictedVocab) -> TaggedSentence:
    """Replace the tag with BW at every restricted-token position."""
    tags = tuple(
        BW if is_restricted(vocab, tok) else tag
        for tok, tag in zip(tagged.tokens, tagged.tags)
    )
    return TaggedSentence(tagged.id, tagged.tokens, tagged.label, tags)


def load_tagged_corpus(path) -> List[TaggedSentence]:
    """Read a JSON-lines corpus that carries tags on every record."""
    import json

    sentences: List[TaggedSentence] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "tags" not in rec:
                raise InvalidToken(f"{path}:{lineno}: record has no tags")
            sentences.append(
                TaggedSentence(
                    rec["id"], tuple(rec["tokens"]), rec["label"], tuple(rec["tags"])
                )
            )
    return sentences
