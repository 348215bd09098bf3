# -*- coding: utf-8 -*-
"""
Contenido: Vectores de Términos y Carga Sintética
=================================================

Sustituto estadístico del dataset musical: un corpus sintético con
frecuencias de términos Zipf agrupadas por tópicos, réplicas por par,
flujo de consultas derivadas de documentos semilla y relevancia
calculada exhaustivamente (oráculo para el recall).

USO:
    wl = generate_workload(WorkloadParams(), n_peers=25, rng=sim.rng("workload"))
    wl.relevance[0]          # ids de documentos relevantes para la consulta 0
    wl.to_json()             # serialización estable (bytes idénticos por semilla)
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set

import numpy as np

from engine import RngStream
from exceptions import BadConfig, EmptyVector

logger = logging.getLogger("cdpsim.content")

MAX_SEED_RETRIES = 200


# ============================================
# TERM VECTOR
# ============================================

class TermVector:
    """Vector disperso term_id -> peso (>= 0); los pesos cero no se guardan"""

    __slots__ = ("entries", "_norm")

    def __init__(self, entries: Mapping[int, float] | None = None):
        clean: Dict[int, float] = {}
        for term, weight in (entries or {}).items():
            w = float(weight)
            if w < 0.0:
                raise ValueError(f"peso negativo para el término {term}: {w}")
            if w > 0.0:
                clean[int(term)] = w
        self.entries = clean
        self._norm = math.sqrt(sum(w * w for w in clean.values()))

    @property
    def norm(self) -> float:
        return self._norm

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TermVector) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(frozenset(self.entries.items()))

    def __repr__(self) -> str:
        return f"TermVector({dict(sorted(self.entries.items()))})"

    def scaled(self, c: float) -> "TermVector":
        return TermVector({t: w * c for t, w in self.entries.items()})

    def top_terms(self, n: int) -> List[int]:
        """Los n términos de mayor peso (empates por id ascendente)"""
        ranked = sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))
        return [t for t, _ in ranked[:n]]

    def to_json(self) -> Dict[str, float]:
        return {str(t): w for t, w in sorted(self.entries.items())}

    @classmethod
    def from_json(cls, data: Mapping[str, float]) -> "TermVector":
        return cls({int(t): w for t, w in data.items()})


def cosine(a: TermVector, b: TermVector) -> float:
    """dot(a, b) / (|a|·|b|), en [0, 1] con pesos no negativos"""
    if not a or not b:
        raise EmptyVector("similitud coseno con un vector vacío")
    small, large = (a.entries, b.entries) if len(a) <= len(b) else (b.entries, a.entries)
    dot = 0.0
    for term, w in small.items():
        other = large.get(term)
        if other is not None:
            dot += w * other
    return min(1.0, dot / (a.norm * b.norm))


# ============================================
# DOCUMENTOS Y CARGA
# ============================================

@dataclass(frozen=True)
class Document:
    doc_id: int
    terms: TermVector
    topic: int = -1


@dataclass(frozen=True)
class QuerySpec:
    query_id: int
    terms: TermVector
    origin_peer: int
    issue_time: float
    seed_doc: int = -1


@dataclass
class WorkloadParams:
    n_docs: int = 1700
    n_queries: int = 200
    vocab_size: int = 2000
    zipf_s: float = 1.0
    replication: int = 2
    replication_ratio: float = 0.08
    topic_size: int = 40
    background_prob: float = 0.1
    doc_len_min: int = 30
    doc_len_max: int = 80
    query_terms: int = 3
    noise_terms: int = 1
    theta_match: float = 0.8
    issue_start: float = 50.0
    issue_end: float = 500.0
    placement_bias: float = 0.0
    query_zipf_s: float = 0.8

    def replicas_for(self, n_peers: int) -> int:
        """Réplicas por documento: al menos `replication`, o la fracción `replication_ratio` de los pares"""
        return min(n_peers, max(self.replication, int(round(self.replication_ratio * n_peers))))


@dataclass
class Workload:
    documents: List[Document]
    placement: Dict[int, Set[int]]
    queries: List[QuerySpec]
    relevance: Dict[int, FrozenSet[int]]
    theta_match: float = 0.8
    meta: Dict[str, object] = field(default_factory=dict)

    def documents_by_id(self) -> Dict[int, Document]:
        return {d.doc_id: d for d in self.documents}

    # ============================================
    # SERIALIZACIÓN JSON
    # ============================================

    def to_dict(self) -> Dict[str, object]:
        return {
            "meta": self.meta,
            "theta_match": self.theta_match,
            "documents": [
                {"doc_id": d.doc_id, "topic": d.topic, "terms": d.terms.to_json()} for d in self.documents
            ],
            "placement": {str(p): sorted(docs) for p, docs in sorted(self.placement.items())},
            "queries": [
                {
                    "query_id": q.query_id,
                    "origin_peer": q.origin_peer,
                    "issue_time": q.issue_time,
                    "seed_doc": q.seed_doc,
                    "terms": q.terms.to_json(),
                }
                for q in self.queries
            ],
            "relevance": {str(q): sorted(docs) for q, docs in sorted(self.relevance.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "Workload":
        documents = [
            Document(doc_id=int(d["doc_id"]), terms=TermVector.from_json(d["terms"]), topic=int(d.get("topic", -1)))
            for d in data["documents"]
        ]
        placement = {int(p): set(int(x) for x in docs) for p, docs in data["placement"].items()}
        queries = [
            QuerySpec(
                query_id=int(q["query_id"]),
                terms=TermVector.from_json(q["terms"]),
                origin_peer=int(q["origin_peer"]),
                issue_time=float(q["issue_time"]),
                seed_doc=int(q.get("seed_doc", -1)),
            )
            for q in data["queries"]
        ]
        relevance = {int(q): frozenset(int(x) for x in docs) for q, docs in data["relevance"].items()}
        return cls(
            documents=documents,
            placement=placement,
            queries=queries,
            relevance=relevance,
            theta_match=float(data.get("theta_match", 0.8)),
            meta=dict(data.get("meta", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "Workload":
        return cls.from_dict(json.loads(text))


# ============================================
# REGLA DE COINCIDENCIA
# ============================================

def matches(doc: Document, q: TermVector, theta_match: float) -> bool:
    """Regla local de acierto: coseno >= θ (borde inclusivo)"""
    if not doc.terms or not q:
        return False
    return cosine(doc.terms, q) >= theta_match


def _inverted_index(documents: Iterable[Document]) -> Dict[int, List[Document]]:
    index: Dict[int, List[Document]] = defaultdict(list)
    for doc in documents:
        for term in doc.terms.entries:
            index[term].append(doc)
    return index


def _relevant_docs(q: TermVector, index: Mapping[int, List[Document]], theta_match: float) -> FrozenSet[int]:
    candidates: Dict[int, Document] = {}
    for term in q.entries:
        for doc in index.get(term, ()):
            candidates[doc.doc_id] = doc
    return frozenset(doc_id for doc_id, doc in candidates.items() if matches(doc, q, theta_match))


# ============================================
# GENERADOR
# ============================================

def _validate_workload_params(cfg: WorkloadParams, n_peers: int) -> None:
    if n_peers <= 0:
        raise BadConfig("n_peers debe ser > 0")
    if cfg.vocab_size < cfg.query_terms + cfg.noise_terms:
        raise BadConfig(
            f"vocab_size={cfg.vocab_size} menor que la longitud de consulta ({cfg.query_terms + cfg.noise_terms})"
        )
    if cfg.n_docs <= 0 or cfg.n_queries < 0:
        raise BadConfig("n_docs debe ser > 0 y n_queries >= 0")
    if cfg.replication < 1:
        raise BadConfig("replication debe ser >= 1")
    if not 0.0 <= cfg.replication_ratio <= 1.0:
        raise BadConfig(f"replication_ratio={cfg.replication_ratio} fuera de [0, 1]")
    if cfg.query_zipf_s < 0.0:
        raise BadConfig("query_zipf_s debe ser >= 0")
    if cfg.topic_size < 1 or cfg.topic_size > cfg.vocab_size:
        raise BadConfig(f"topic_size={cfg.topic_size} fuera de [1, vocab_size]")
    if cfg.doc_len_min < 1 or cfg.doc_len_max < cfg.doc_len_min:
        raise BadConfig("longitudes de documento inválidas")
    if cfg.query_terms < 1:
        raise BadConfig("query_terms debe ser >= 1")
    if cfg.issue_end < cfg.issue_start:
        raise BadConfig("issue_end < issue_start")


def _zipf_weights(n: int, s: float) -> np.ndarray:
    ranks = np.arange(1, n + 1, dtype=float)
    w = ranks ** (-s)
    return w / w.sum()


def _make_documents(cfg: WorkloadParams, gen: np.random.Generator) -> List[Document]:
    n_topics = max(1, cfg.vocab_size // cfg.topic_size)
    vocab = gen.permutation(cfg.vocab_size)
    topics = [vocab[k * cfg.topic_size:(k + 1) * cfg.topic_size] for k in range(n_topics)]
    rank_p = _zipf_weights(cfg.topic_size, cfg.zipf_s)

    documents = []
    for doc_id in range(cfg.n_docs):
        topic = int(gen.integers(0, n_topics))
        length = int(gen.integers(cfg.doc_len_min, cfg.doc_len_max + 1))
        background = gen.random(length) < cfg.background_prob
        n_bg = int(background.sum())
        tokens = np.concatenate([
            gen.choice(topics[topic], size=length - n_bg, p=rank_p),
            gen.integers(0, cfg.vocab_size, size=n_bg),
        ])
        terms, counts = np.unique(tokens, return_counts=True)
        documents.append(
            Document(
                doc_id=doc_id,
                terms=TermVector({int(t): float(c) for t, c in zip(terms, counts)}),
                topic=topic,
            )
        )
    return documents


def _place_documents(
    cfg: WorkloadParams, documents: List[Document], n_peers: int, gen: np.random.Generator
) -> Dict[int, Set[int]]:
    placement: Dict[int, Set[int]] = {p: set() for p in range(n_peers)}
    replicas = cfg.replicas_for(n_peers)
    n_topics = max(1, cfg.vocab_size // cfg.topic_size)
    interest = gen.integers(0, n_topics, size=n_peers)
    interested: Dict[int, List[int]] = defaultdict(list)
    for peer, topic in enumerate(interest):
        interested[int(topic)].append(peer)

    for doc in documents:
        chosen: List[int] = []
        if cfg.placement_bias > 0.0:
            pool = [p for p in interested.get(doc.topic, ())]
            for _ in range(replicas):
                pool = [p for p in pool if p not in chosen]
                if pool and gen.random() < cfg.placement_bias:
                    chosen.append(int(pool[int(gen.integers(0, len(pool)))]))
        rest = [p for p in range(n_peers) if p not in chosen]
        missing = replicas - len(chosen)
        if missing > 0:
            chosen.extend(int(p) for p in gen.choice(rest, size=missing, replace=False))
        for peer in chosen:
            placement[peer].add(doc.doc_id)
    return placement


def _popularity(cfg: WorkloadParams, n_docs: int, gen: np.random.Generator):
    """(orden, pesos) de popularidad Zipf sobre los documentos; None = semillas uniformes"""
    if cfg.query_zipf_s <= 0.0:
        return None
    return gen.permutation(n_docs), _zipf_weights(n_docs, cfg.query_zipf_s)


def _draw_seed(popularity, n_docs: int, gen: np.random.Generator) -> int:
    if popularity is None:
        return int(gen.integers(0, n_docs))
    order, weights = popularity
    return int(order[int(gen.choice(n_docs, p=weights))])


def _make_query(
    seed_doc: Document, cfg: WorkloadParams, gen: np.random.Generator
) -> TermVector:
    entries = {t: seed_doc.terms.entries[t] for t in seed_doc.terms.top_terms(cfg.query_terms)}
    added = 0
    while added < cfg.noise_terms:
        term = int(gen.integers(0, cfg.vocab_size))
        if term not in entries:
            entries[term] = 1.0
            added += 1
    return TermVector(entries)


def generate_workload(cfg: WorkloadParams, n_peers: int, rng: RngStream) -> Workload:
    """
    Genera corpus, réplicas, consultas y relevancia.

    Cada consulta se deriva de un documento semilla, sorteado según una
    popularidad Zipf(query_zipf_s) sobre los documentos (los mismos ítems se
    piden una y otra vez); si su conjunto relevante resulta vacío se sortea
    otra semilla (acotado por MAX_SEED_RETRIES).

    Cada documento queda en replicas_for(n_peers) pares, así que cada par
    comparte una fracción fija del corpus sin importar el tamaño de la red.
    """
    _validate_workload_params(cfg, n_peers)
    gen = rng.gen

    documents = _make_documents(cfg, gen)
    placement = _place_documents(cfg, documents, n_peers, gen)
    index = _inverted_index(documents)
    popularity = _popularity(cfg, len(documents), gen)

    queries: List[QuerySpec] = []
    relevance: Dict[int, FrozenSet[int]] = {}
    retries = 0
    for query_id in range(cfg.n_queries):
        for _ in range(MAX_SEED_RETRIES):
            seed_doc = documents[_draw_seed(popularity, len(documents), gen)]
            terms = _make_query(seed_doc, cfg, gen)
            relevant = _relevant_docs(terms, index, cfg.theta_match)
            if relevant:
                break
            retries += 1
        else:
            raise BadConfig(
                f"ninguna semilla produjo documentos relevantes con theta_match={cfg.theta_match}"
            )
        queries.append(
            QuerySpec(
                query_id=query_id,
                terms=terms,
                origin_peer=int(gen.integers(0, n_peers)),
                issue_time=float(gen.uniform(cfg.issue_start, cfg.issue_end)),
                seed_doc=seed_doc.doc_id,
            )
        )
        relevance[query_id] = relevant

    if retries:
        logger.warning(f"⚠️ {retries} semilla(s) de consulta descartadas por relevancia vacía")
    logger.info(
        f"📦 Carga generada: {len(documents)} documentos, {len(queries)} consultas, {n_peers} pares"
    )
    return Workload(
        documents=documents,
        placement=placement,
        queries=queries,
        relevance=relevance,
        theta_match=cfg.theta_match,
        meta={"params": asdict(cfg), "n_peers": n_peers, "seed": rng.master_seed},
    )
