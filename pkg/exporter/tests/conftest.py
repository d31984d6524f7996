"""Fixtures: a synthetic word-signature corpus, a word-level tokenizer,
and a tiny fine-tuned encoder checkpoint to export from.

Fine-tuning is a prerequisite of the exporter, not part of it; it
happens here so the export path runs against a checkpoint whose head
actually learned the label space.
"""

from __future__ import annotations

import numpy as np
import pytest
import torch

KNOWN_CLASSES = [
    "cs.ai", "cs.cl", "math.co", "math.nt",
    "physics.optics", "q-bio.nc", "stat.ml", "econ.em",
]
UNKNOWN_CLASSES = ["cs.cr", "math.ag", "astro-ph.sr"]
ALL_CLASSES = KNOWN_CLASSES + UNKNOWN_CLASSES

SIG_WORDS = {name: [f"term{c}x{k}" for k in range(6)] for c, name in enumerate(ALL_CLASSES)}
FILLER = [f"filler{k}" for k in range(30)]


def make_document(rng: np.random.Generator, class_name: str) -> str:
    words = list(rng.choice(SIG_WORDS[class_name], size=6, replace=True))
    words += list(rng.choice(FILLER, size=4, replace=True))
    rng.shuffle(words)
    return " ".join(words)


def build_tokenizer():
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace
    from tokenizers.processors import TemplateProcessing
    from transformers import PreTrainedTokenizerFast

    vocab = {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[SEP]": 3}
    for words in SIG_WORDS.values():
        for word in words:
            vocab[word] = len(vocab)
    for word in FILLER:
        vocab[word] = len(vocab)

    tok = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token="[PAD]",
        unk_token="[UNK]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        model_max_length=64,
    ), len(vocab)


def finetune_tiny_bert(tokenizer, vocab_size: int, seed: int = 0):
    """A 2-layer encoder fine-tuned on 1000 known-class documents."""
    from transformers import BertConfig, BertForSequenceClassification

    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    config = BertConfig(
        vocab_size=vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        num_labels=len(KNOWN_CLASSES),
        pad_token_id=0,
    )
    model = BertForSequenceClassification(config)

    texts, labels = [], []
    for _ in range(1000):
        j = int(rng.integers(0, len(KNOWN_CLASSES)))
        texts.append(make_document(rng, KNOWN_CLASSES[j]))
        labels.append(j)

    optimizer = torch.optim.AdamW(model.parameters(), lr=2e-3)
    model.train()
    for _ in range(10):
        for start in range(0, len(texts), 64):
            batch = tokenizer(
                texts[start : start + 64],
                padding=True, truncation=True, max_length=64, return_tensors="pt",
            )
            target = torch.tensor(labels[start : start + 64])
            loss = model(**batch, labels=target).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    model.eval()
    return model


@pytest.fixture(scope="session")
def checkpoint_dir(tmp_path_factory):
    where = tmp_path_factory.mktemp("ckpt") / "tiny-bert"
    tokenizer, vocab_size = build_tokenizer()
    model = finetune_tiny_bert(tokenizer, vocab_size)
    model.save_pretrained(where)
    tokenizer.save_pretrained(where)
    return where


@pytest.fixture(scope="session")
def export_dataset_dir(tmp_path_factory):
    """1000 documents: 800 across the 8 known classes, 200 unknowns."""
    import datasets

    rng = np.random.default_rng(7)
    texts, labels = [], []
    for name in KNOWN_CLASSES:
        for _ in range(100):
            texts.append(make_document(rng, name))
            labels.append(name)
    for i in range(200):
        name = UNKNOWN_CLASSES[i % len(UNKNOWN_CLASSES)]
        texts.append(make_document(rng, name))
        labels.append(name)
    order = rng.permutation(len(texts))
    data = datasets.Dataset.from_dict(
        {
            "abstract": [texts[i] for i in order],
            "categories": [labels[i] for i in order],
        }
    )
    where = tmp_path_factory.mktemp("data") / "corpus"
    data.save_to_disk(str(where))
    return where


@pytest.fixture(scope="session")
def known_classes_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("classes") / "known.txt"
    path.write_text("\n".join(KNOWN_CLASSES) + "\n")
    return path
