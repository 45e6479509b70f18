"""Python interface to the subtitle-prompted transcript refinement core."""

try:
    from . import _subprompt as _core
except ImportError:  # in-tree build: the extension sits directly on PYTHONPATH
    import _subprompt as _core

__all__ = [
    "SubtitleCue",
    "Vocab",
    "Model",
    "align_ops",
    "assemble_decoder_input",
    "attention",
    "breakdown_wer",
    "build_vocab",
    "corpus_wer",
    "cues_in_window",
    "entropy_weights",
    "gini_weights",
    "greedy_decode",
    "hallucination_filter",
    "load_checkpoint",
    "load_manifest",
    "make_model",
    "max_weights",
    "normalize_text",
    "parse_srt",
    "render_srt",
    "save_checkpoint",
    "synth_corpus",
    "tokenize",
    "word_frequencies",
]

globals().update({name: getattr(_core, name) for name in __all__})
