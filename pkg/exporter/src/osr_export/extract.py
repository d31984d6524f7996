"""Feature extraction from a fine-tuned sequence-classification checkpoint.

The exported features F(x) are the exact activations fed into the final
classification linear (captured with a forward hook), so the engine can
reproduce the exported logits as dot(F, W) + b. For encoder models that
is the pooled [CLS]-path embedding; for decoder-style models whose head
is applied at every position, the activation at the last non-padding
token is taken, matching the model's own pooling of its logits.

The exporter never trains. Fine-tuning the checkpoint is a prerequisite
handled elsewhere.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .errors import ConsistencyError, HeadResolutionError, JobValidationError
from .job import DROP, ExportJob, map_label
from .packwriter import write_feature_pack

CONSISTENCY_TOLERANCE = 1e-3


def locate_head(model: nn.Module, num_labels: int) -> nn.Linear:
    """Final linear layer producing the class logits.

    The last linear module with out_features == num_labels, in module
    registration order; classification heads sit at the end of the stack.
    """
    head = None
    for _, module in model.named_modules():
        if isinstance(module, nn.Linear) and module.out_features == num_labels:
            head = module
    if head is None:
        raise HeadResolutionError(
            f"missing head weights: no linear layer with {num_labels} outputs"
        )
    return head


def _last_token_gather(activations: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
    """Pick each sequence's last non-padding position from (B, T, d)."""
    positions = torch.arange(activations.shape[1], device=activations.device)
    last = (attention_mask * positions).argmax(dim=1)
    return activations[torch.arange(activations.shape[0]), last]


def load_rows(job: ExportJob):
    """Texts and mapped labels from the job's dataset, in dataset order.

    Dataset resolution: a saved-to-disk dataset directory, a local
    json/jsonl/csv file, or a hub dataset name, in that order.
    """
    import datasets
    from pathlib import Path

    source = Path(job.dataset)
    if source.is_dir():
        data = datasets.load_from_disk(str(source))
        if isinstance(data, datasets.DatasetDict):
            split = "train" if "train" in data else next(iter(data))
            data = data[split]
    elif source.is_file():
        kind = "csv" if source.suffix == ".csv" else "json"
        data = datasets.load_dataset(kind, data_files=str(source), split="train")
    else:
        data = datasets.load_dataset(job.dataset, split="train")

    if job.text_field not in data.column_names:
        raise JobValidationError(f"dataset has no field {job.text_field!r}")
    if job.label_field not in data.column_names:
        raise JobValidationError(f"dataset has no field {job.label_field!r}")

    index = job.class_index()
    texts: list[str] = []
    labels: list[int] = []
    for row in data:
        mapped = map_label(row[job.label_field], index, job.multi_label_policy)
        if mapped == DROP:
            continue
        texts.append(str(row[job.text_field]))
        labels.append(mapped)
    return texts, labels


def export_features(job: ExportJob) -> str:
    """Run the checkpoint over the dataset and write a version-1 pack.

    Returns the output directory. Raises HeadResolutionError when no
    classification linear is found, JobValidationError when the head
    size disagrees with the known-class list, and ConsistencyError when
    dot(F, W) + b fails to reproduce the model logits within 1e-3.
    """
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    texts, labels = load_rows(job)

    tokenizer = AutoTokenizer.from_pretrained(job.model_path)
    model = AutoModelForSequenceClassification.from_pretrained(job.model_path)
    model.to(job.device)
    model.eval()

    num_labels = int(model.config.num_labels)
    if num_labels != len(job.known_classes):
        raise JobValidationError(
            f"checkpoint head has {num_labels} outputs but "
            f"{len(job.known_classes)} known classes were listed"
        )
    head = locate_head(model, num_labels)

    captured: list[torch.Tensor] = []

    def capture(_module, inputs, _output):
        captured.append(inputs[0].detach())

    handle = head.register_forward_hook(capture)
    feature_rows: list[np.ndarray] = []
    logit_rows: list[np.ndarray] = []
    try:
        with torch.no_grad():
            for start in range(0, len(texts), job.batch_size):
                batch = texts[start : start + job.batch_size]
                encoded = tokenizer(
                    batch,
                    padding=True,
                    truncation=True,
                    max_length=job.max_length,
                    return_tensors="pt",
                ).to(job.device)
                captured.clear()
                output = model(**encoded)
                if not captured:
                    raise HeadResolutionError(
                        "classification head was never invoked during forward"
                    )
                activation = captured[-1]
                if activation.dim() == 3:
                    activation = _last_token_gather(activation, encoded["attention_mask"])
                feature_rows.append(activation.cpu().numpy())
                logit_rows.append(output.logits.detach().cpu().numpy())
    finally:
        handle.remove()

    d = int(head.in_features)
    features = (
        np.concatenate(feature_rows) if feature_rows else np.zeros((0, d), dtype=np.float32)
    )
    logits = (
        np.concatenate(logit_rows)
        if logit_rows
        else np.zeros((0, num_labels), dtype=np.float32)
    )
    weights = head.weight.detach().cpu().numpy()
    bias = (
        head.bias.detach().cpu().numpy()
        if head.bias is not None
        else np.zeros(num_labels, dtype=np.float32)
    )

    if features.shape[1] != weights.shape[1]:
        raise JobValidationError(
            f"dimension mismatch between embedding ({features.shape[1]}) "
            f"and head ({weights.shape[1]})"
        )
    if len(features):
        recomputed = features.astype(np.float64) @ weights.astype(np.float64).T + bias
        gap = float(np.abs(recomputed - logits.astype(np.float64)).max())
        if gap > CONSISTENCY_TOLERANCE:
            raise ConsistencyError(
                f"captured features do not reproduce logits (max gap {gap:.3g}); "
                "the located head or pooling rule does not match this architecture"
            )

    write_feature_pack(
        job.out_dir,
        features=features,
        logits=logits,
        labels=np.asarray(labels, dtype=np.int32),
        weights=weights,
        bias=bias,
        class_names=list(job.known_classes),
    )
    return job.out_dir
