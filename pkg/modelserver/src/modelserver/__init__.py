"""HTTP model server and editor training for the redactor pipeline.

`modelserver.server` exposes /tag, /fill, /edit, /ppl, and /healthz over
JSON, with a deterministic echo-stub mode for contract testing.
`modelserver.train_editor` trains the small seq2seq editor served on
/edit.
"""

from .seq2seq import ModelConfig, Seq2SeqEditor, Vocab, beam_search, load_artifact, save_artifact
from .server import ServerState, create_app

__all__ = [
    "ModelConfig",
    "Seq2SeqEditor",
    "ServerState",
    "Vocab",
    "beam_search",
    "create_app",
    "load_artifact",
    "save_artifact",
]

__version__ = "0.1.0"
