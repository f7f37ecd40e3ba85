"""Per-class label flipping on training corpora, with a full audit trail.

For a flip fraction p, floor(p * n_c) samples of every class c are chosen
uniformly at random without replacement and relabeled to a class drawn
uniformly from the other K-1 classes. Random streams are derived per
(seed, class name), so adding or removing a class never perturbs the
selections made in other classes.
"""

import math
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, Sample
from .errors import ValidationError
from .seeding import derive_rng


@dataclass(frozen=True)
class FlipEntry:
    sample_id: str
    original: str
    flipped: str


@dataclass(frozen=True)
class FlipRecord:
    """Which training labels were flipped, from what to what."""

    flip_fraction: float
    seed: int
    entries: tuple

    def to_csv(self, path) -> None:
        lines = [f"# p={self.flip_fraction!r} seed={self.seed}",
                 "sample_id,original,flipped"]
        lines += [f"{e.sample_id},{e.original},{e.flipped}" for e in self.entries]
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    @staticmethod
    def from_csv(path) -> "FlipRecord":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = lines[0]
        if not header.startswith("# p="):
            raise ValidationError(f"{path}: missing flip-record header comment")
        p_part, seed_part = header[2:].split()
        entries = tuple(
            FlipEntry(*line.split(",")) for line in lines[2:] if line
        )
        return FlipRecord(
            flip_fraction=float(p_part.split("=")[1]),
            seed=int(seed_part.split("=")[1]),
            entries=entries,
        )


def flip_count(n_class: int, p: float) -> int:
    """floor(p * n); the floor of the exact product, robust to float error."""
    if n_class < 0:
        raise ValidationError(f"class size must be nonnegative, got {n_class}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"flip fraction must be in [0, 1], got {p}")
    # 1e-9 absorbs representation error in p * n (e.g. 10 * 0.3 -> 2.9999...96)
    return int(math.floor(n_class * p + 1e-9))


def flip_labels(train: Corpus, p: float, seed: int):
    """Flip floor(p * n_c) labels per class; returns (flipped corpus, record).

    The flipped corpus preserves sample order and opcode content exactly;
    only family labels change. Deterministic in (train, p, seed).
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"flip fraction must be in [0, 1], got {p}")
    classes = train.families
    if len(classes) < 2:
        raise ValidationError(
            f"label flipping needs at least 2 classes, got {len(classes)}"
        )

    by_class = {c: [] for c in classes}
    for pos, s in enumerate(train.samples):
        by_class[s.family].append(pos)

    new_label = {}
    entries = []
    for ci, c in enumerate(classes):
        positions = by_class[c]
        n_flip = flip_count(len(positions), p)
        if n_flip == 0:
            continue
        rng = derive_rng(seed, "flip", c)
        chosen = rng.choice(len(positions), size=n_flip, replace=False)
        alternatives = [k for k in classes if k != c]
        targets = rng.integers(0, len(alternatives), size=n_flip)
        for j, t in zip(sorted(chosen), targets):
            pos = positions[j]
            flipped_to = alternatives[t]
            new_label[pos] = flipped_to
            entries.append(FlipEntry(train.samples[pos].id, c, flipped_to))

    flipped_samples = [
        Sample(id=s.id, family=new_label[i], opcodes=s.opcodes)
        if i in new_label else s
        for i, s in enumerate(train.samples)
    ]
    flipped = Corpus(flipped_samples)
    # Opcode content and order are untouched, so token memos stay valid.
    flipped._cache.update(train._cache)
    record = FlipRecord(flip_fraction=p, seed=seed, entries=tuple(entries))
    return flipped, record
