"""Opcode-sequence featurization: TF-IDF vectors and 64x64 index images.

Feature vectors are dense numpy arrays of length V (the fitted vocabulary
size); at desk scale V is small enough that a sparse representation buys
nothing. All weights are nonnegative and every vector with at least one
in-vocabulary token is L2-normalized.

The image encoder maps the first 4096 opcodes of a sample onto a 64x64
row-major grid; cell values are (vocab_index + 1) / V so that 0 is reserved
for padding and out-of-vocabulary tokens.

Token strings are interned to integer ids process-wide so repeated
featurization passes over the same corpus cost array lookups, not dict
probes. Intern ids never influence results; every ordering is derived from
corpus order alone.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Sample
from .errors import ValidationError

IMAGE_SIDE = 64
IMAGE_CELLS = IMAGE_SIDE * IMAGE_SIDE

_intern_ids: dict = {}
_intern_tokens: list = []
_intern_lock = threading.Lock()


def _intern(token: str) -> int:
    gid = _intern_ids.get(token)
    if gid is None:
        with _intern_lock:
            gid = _intern_ids.get(token)
            if gid is None:
                gid = len(_intern_tokens)
                _intern_ids[token] = gid
                _intern_tokens.append(token)
    return gid


def _encode_sample(sample: Sample) -> np.ndarray:
    get = _intern_ids.get
    ids = [0] * len(sample.opcodes)
    for i, tok in enumerate(sample.opcodes):
        gid = get(tok)
        ids[i] = gid if gid is not None else _intern(tok)
    return np.asarray(ids, dtype=np.int64)


def _corpus_token_ids(corpus: Corpus) -> list:
    """Per-sample intern-id arrays, memoized on the corpus."""
    cached = corpus._cache.get("token_ids")
    if cached is None:
        cached = [_encode_sample(s) for s in corpus.samples]
        corpus._cache["token_ids"] = cached
    return cached


@dataclass(frozen=True)
class Vocabulary:
    """Distinct training tokens, indexed in first-occurrence order."""

    tokens: tuple
    index: dict
    # maps intern id -> vocabulary index (-1 when out of vocabulary)
    _gid_map: np.ndarray

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def map_ids(self, token_ids: np.ndarray) -> np.ndarray:
        """Intern ids -> vocabulary indices, -1 for unknown tokens."""
        gm = self._gid_map
        out = np.full(token_ids.shape, -1, dtype=np.int64)
        known = token_ids < gm.shape[0]
        out[known] = gm[token_ids[known]]
        return out


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    n_train_docs: int


def build_vocabulary(train: Corpus) -> Vocabulary:
    """One entry per distinct training opcode, in first-occurrence order."""
    if not train.samples:
        raise ValidationError("cannot build a vocabulary from an empty corpus")
    arrays = _corpus_token_ids(train)
    nonempty = [a for a in arrays if a.size]
    if not nonempty:
        raise ValidationError("all training samples are empty; vocabulary is empty")
    concat = np.concatenate(nonempty)
    gids, first_pos = np.unique(concat, return_index=True)
    ordered_gids = gids[np.argsort(first_pos, kind="stable")]

    tokens = tuple(_intern_tokens[g] for g in ordered_gids)
    index = {tok: i for i, tok in enumerate(tokens)}
    gid_map = np.full(int(gids.max()) + 1, -1, dtype=np.int64)
    gid_map[ordered_gids] = np.arange(len(ordered_gids))
    return Vocabulary(tokens=tokens, index=index, _gid_map=gid_map)


def tfidf_fit(train: Corpus, vocab: Vocabulary) -> TfidfModel:
    """Smoothed idf over the training split: ln((1+N)/(1+df)) + 1."""
    v = len(vocab)
    df = np.zeros(v, dtype=np.int64)
    arrays = _corpus_token_ids(train)
    for a in arrays:
        present = np.unique(vocab.map_ids(a))
        present = present[present >= 0]
        df[present] += 1
    n_docs = len(arrays)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    return TfidfModel(vocabulary=vocab, idf=idf, n_train_docs=n_docs)


def _counts(vocab: Vocabulary, token_ids: np.ndarray) -> np.ndarray:
    idx = vocab.map_ids(token_ids)
    idx = idx[idx >= 0]
    return np.bincount(idx, minlength=len(vocab)).astype(np.float64)


def tfidf_transform(model: TfidfModel, sample: Sample) -> np.ndarray:
    """Raw count x idf, L2-normalized; all-zero when nothing is in vocabulary."""
    weights = _counts(model.vocabulary, _encode_sample(sample)) * model.idf
    norm = math.sqrt(float(weights @ weights))
    if norm > 0.0:
        weights /= norm
    return weights


def tfidf_transform_corpus(model: TfidfModel, corpus: Corpus) -> np.ndarray:
    """Stacked transform of every sample, one row per sample in corpus order."""
    arrays = _corpus_token_ids(corpus)
    out = np.zeros((len(arrays), len(model.vocabulary)), dtype=np.float64)
    for i, a in enumerate(arrays):
        out[i] = _counts(model.vocabulary, a) * model.idf
    norms = np.sqrt((out * out).sum(axis=1))
    nonzero = norms > 0.0
    out[nonzero] /= norms[nonzero, None]
    return out


def encode_image(sample: Sample, vocab: Vocabulary) -> np.ndarray:
    """First 4096 opcodes as a 64x64 grid of (index+1)/V, zero-padded."""
    if not len(vocab):
        raise ValidationError("cannot encode images with an empty vocabulary")
    return _image_from_ids(_encode_sample(sample), vocab).reshape(IMAGE_SIDE, IMAGE_SIDE)


def encode_images(corpus: Corpus, vocab: Vocabulary) -> np.ndarray:
    """All samples as a (n, 64, 64) array in corpus order."""
    if not len(vocab):
        raise ValidationError("cannot encode images with an empty vocabulary")
    arrays = _corpus_token_ids(corpus)
    out = np.zeros((len(arrays), IMAGE_CELLS), dtype=np.float64)
    for i, a in enumerate(arrays):
        out[i] = _image_from_ids(a, vocab)
    return out.reshape(len(arrays), IMAGE_SIDE, IMAGE_SIDE)


def _image_from_ids(token_ids: np.ndarray, vocab: Vocabulary) -> np.ndarray:
    flat = np.zeros(IMAGE_CELLS, dtype=np.float64)
    idx = vocab.map_ids(token_ids[:IMAGE_CELLS])
    known = idx >= 0
    flat[: idx.shape[0]][known] = (idx[known] + 1.0) / len(vocab)
    return flat
