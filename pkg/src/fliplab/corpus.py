"""Labeled opcode-sequence corpora: loading, synthesis, filtering, splitting.

A corpus on disk is ``<root>/<family>/<sample>.txt`` with one opcode
mnemonic per line (UTF-8, LF or CRLF). In memory a corpus is an ordered
list of samples; the canonical order (lexicographic family, then sample id)
is established when a corpus is created from a raw source and preserved by
every downstream transformation, so that anything derived from sample order
is reproducible.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestionError, SplitError, ValidationError
from .seeding import derive_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sample:
    """One specimen: an ordered opcode mnemonic sequence and its family label."""

    id: str
    family: str
    opcodes: tuple


@dataclass
class Corpus:
    """An ordered collection of samples with the distinct families present."""

    samples: list
    families: tuple = field(init=False)
    # Internal memo space (token encodings etc.); carried across
    # content-preserving transformations, never serialized.
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        ids = set()
        for s in self.samples:
            if s.id in ids:
                raise ValidationError(f"duplicate sample id {s.id!r}")
            ids.add(s.id)
            if not s.family:
                raise ValidationError(f"sample {s.id!r} has an empty family label")
        self.families = tuple(sorted({s.family for s in self.samples}))

    def __len__(self):
        return len(self.samples)

    def labels(self) -> list:
        return [s.family for s in self.samples]

    def family_counts(self) -> dict:
        counts = {}
        for s in self.samples:
            counts[s.family] = counts.get(s.family, 0) + 1
        return counts


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/test partition of a corpus, stratified by family."""

    train: Corpus
    test: Corpus
    seed: int
    test_fraction: float


@dataclass(frozen=True)
class FamilySpec:
    """Generation recipe for one synthetic family.

    ``transitions`` is a row-stochastic first-order Markov matrix over
    ``vocabulary``; the initial token is uniform over the vocabulary.
    Sequence lengths are uniform on [mean_length - length_jitter,
    mean_length + length_jitter].
    """

    name: str
    sample_count: int
    vocabulary: tuple
    transitions: np.ndarray
    mean_length: int
    length_jitter: int = 0


@dataclass(frozen=True)
class SyntheticSpec:
    """Full recipe for a synthetic corpus; a pure function of itself + seed."""

    families: tuple
    master_seed: int


def validate_synthetic_spec(spec: SyntheticSpec) -> None:
    names = set()
    for fam in spec.families:
        if fam.name in names:
            raise ValidationError(f"duplicate family {fam.name!r} in synthetic spec")
        names.add(fam.name)
        if fam.sample_count < 1:
            raise ValidationError(f"family {fam.name!r}: sample_count must be >= 1")
        if fam.mean_length < 1:
            raise ValidationError(f"family {fam.name!r}: mean_length must be >= 1")
        if fam.length_jitter < 0 or fam.length_jitter > fam.mean_length:
            raise ValidationError(
                f"family {fam.name!r}: length_jitter must be in [0, mean_length]"
            )
        if not fam.vocabulary:
            raise ValidationError(f"family {fam.name!r}: empty vocabulary")
        t = np.asarray(fam.transitions, dtype=np.float64)
        v = len(fam.vocabulary)
        if t.shape != (v, v):
            raise ValidationError(
                f"family {fam.name!r}: transition matrix must be {v}x{v}, got {t.shape}"
            )
        if np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError(
                f"family {fam.name!r}: transition rows must be nonnegative and sum to 1"
            )


def load_corpus(root_path) -> Corpus:
    """Read a corpus from ``<root>/<family>/<sample>.txt`` files.

    Sample ids are ``family/<file stem>``. Blank lines are skipped; a file
    with no non-blank lines becomes a zero-length sample (warned, not an
    error).
    """
    root = Path(root_path)
    if not root.is_dir():
        raise IngestionError(f"corpus root is not a readable directory: {root}")
    family_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not family_dirs:
        raise IngestionError(f"corpus root contains no family directories: {root}")

    samples = []
    for fam_dir in family_dirs:
        files = sorted(fam_dir.glob("*.txt"))
        if not files:
            raise IngestionError(f"family directory has no .txt files: {fam_dir}")
        for path in files:
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise IngestionError(f"cannot read {path}: {exc}") from exc
            opcodes = []
            for lineno, line in enumerate(text.splitlines(), start=1):
                token = line.strip()
                if not token:
                    continue
                if any(ch.isspace() for ch in token):
                    raise IngestionError(
                        f"{path}:{lineno}: opcode contains whitespace: {line!r}"
                    )
                opcodes.append(token)
            if not opcodes:
                log.warning("zero-length sample: %s", path)
            samples.append(
                Sample(id=f"{fam_dir.name}/{path.stem}", family=fam_dir.name,
                       opcodes=tuple(opcodes))
            )
    samples.sort(key=lambda s: (s.family, s.id))
    return Corpus(samples)


def write_corpus(corpus: Corpus, root_path) -> None:
    """Write a corpus in the on-disk layout that load_corpus reads."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    for s in corpus.samples:
        fam_dir = root / s.family
        fam_dir.mkdir(exist_ok=True)
        stem = s.id.split("/", 1)[1] if "/" in s.id else s.id
        (fam_dir / f"{stem}.txt").write_text(
            "".join(tok + "\n" for tok in s.opcodes), encoding="utf-8"
        )


def generate_synthetic(spec: SyntheticSpec) -> Corpus:
    """Draw a corpus from per-family Markov chains; deterministic in the spec."""
    validate_synthetic_spec(spec)
    samples = []
    for fam in sorted(spec.families, key=lambda f: f.name):
        rng = derive_rng(spec.master_seed, "synthetic", fam.name)
        seqs = _draw_family_sequences(fam, rng)
        width = max(5, len(str(fam.sample_count)))
        for i, seq in enumerate(seqs):
            samples.append(
                Sample(
                    id=f"{fam.name}/{fam.name}-{i:0{width}d}",
                    family=fam.name,
                    opcodes=seq,
                )
            )
    return Corpus(samples)


def _draw_family_sequences(fam: FamilySpec, rng: np.random.Generator) -> list:
    """All chains of one family advance in lockstep; shorter ones are truncated."""
    count = fam.sample_count
    lo = fam.mean_length - fam.length_jitter
    hi = fam.mean_length + fam.length_jitter
    lengths = rng.integers(lo, hi + 1, size=count)
    max_len = int(lengths.max())
    v = len(fam.vocabulary)
    cum = np.cumsum(np.asarray(fam.transitions, dtype=np.float64), axis=1)

    states = np.empty((count, max_len), dtype=np.int64)
    states[:, 0] = rng.integers(0, v, size=count)
    for t in range(1, max_len):
        u = rng.random(count)
        rows = cum[states[:, t - 1]]
        states[:, t] = np.minimum((rows < u[:, None]).sum(axis=1), v - 1)

    vocab = fam.vocabulary
    return [
        tuple(vocab[j] for j in states[i, : lengths[i]]) for i in range(count)
    ]


def filter_min_samples(corpus: Corpus, min_count: int) -> Corpus:
    """Keep only families with at least ``min_count`` samples."""
    if min_count < 1:
        raise ValidationError(f"min_count must be >= 1, got {min_count}")
    counts = corpus.family_counts()
    keep = {fam for fam, n in counts.items() if n >= min_count}
    if len(keep) < 2:
        raise ValidationError(
            f"filtering at min_count={min_count} leaves {len(keep)} families; "
            "multiclass classification needs at least 2"
        )
    return Corpus([s for s in corpus.samples if s.family in keep])


def stratified_split(corpus: Corpus, test_fraction: float, seed: int) -> DatasetSplit:
    """Per-family shuffled split; test count = round(fraction * n), clamped
    to [1, n-1] so both sides see every family."""
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError(f"test_fraction must be in (0,1), got {test_fraction}")
    by_family = {}
    for i, s in enumerate(corpus.samples):
        by_family.setdefault(s.family, []).append(i)

    test_idx = set()
    for family in sorted(by_family):
        idx = by_family[family]
        n = len(idx)
        if n < 2:
            raise SplitError(f"family {family!r} has {n} sample(s); cannot split")
        n_test = int(round(test_fraction * n))
        n_test = min(max(n_test, 1), n - 1)
        rng = derive_rng(seed, "split", family)
        order = rng.permutation(n)
        test_idx.update(idx[j] for j in order[:n_test])

    train = Corpus([s for i, s in enumerate(corpus.samples) if i not in test_idx])
    test = Corpus([s for i, s in enumerate(corpus.samples) if i in test_idx])
    return DatasetSplit(train=train, test=test, seed=seed, test_fraction=test_fraction)
