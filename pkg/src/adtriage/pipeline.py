"""Staged pipeline runs with content-addressed caching.

Stage order: ingest -> features -> filter -> topics -> spread -> report.
Each stage persists its artifacts under the output directory and records a
key hashing its inputs and parameters into manifest.json; a rerun whose key
matches, with all outputs still present, reuses the artifacts untouched.
Reports are cheap and always regenerate. A stage failure aborts the run with
the stage name and cause; artifacts written so far are kept for inspection.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import cluster, corpus, features, labeling, propagation, topics

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LISTINGS_FILE = "listings.jsonl"
RAW_TEXT_FILE = "raw_text.jsonl"
REJECTED_FILE = "rejected.jsonl"
NGRAM_FILE = "ngram_model.json"
FEATURES_FILE = "features.csv"
FILTERED_FILE = "filtered_ids.txt"
SAMPLE_FILE = "review_sample.txt"
PROJECTION_FILE = "projection.csv"
TOPIC_MODEL_FILE = "topic_model.bin"
THETA_FILE = "theta.csv"
RESULTS_FILE = "results.csv"
JOURNAL_FILE = "journal.jsonl"
MANIFEST_FILE = "manifest.json"
REPORT_FILE = "report.txt"
DATASET_SUMMARY_FILE = "dataset_summary.csv"
AGREEMENT_FILE = "agreement.csv"
RESULTS_SUMMARY_FILE = "results_summary.csv"
PHONE_HISTOGRAM_FILE = "phone_histogram.csv"
TOP_TERMS_FILE = "top_terms.csv"

LEXICON_FILES = (
    "words_of_interest.txt",
    "countries.txt",
    "spa_terms.txt",
    "url_patterns.txt",
    "plural_markers.txt",
)

STAGES = ("ingest", "features", "filter", "topics", "spread", "report")


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException | str):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class PipelineConfig:
    input_path: str
    out_dir: str
    input_format: str = "jsonl"
    lexicon_dir: Optional[str] = None
    stopwords_path: Optional[str] = None
    journal_path: Optional[str] = None  # defaults to <out_dir>/journal.jsonl
    ngram_n: int = features.NGRAM_N
    lda_topics: int = topics.DEFAULT_K
    lda_alpha: Optional[float] = None  # None -> 50/K
    lda_beta: float = topics.DEFAULT_BETA
    lda_iterations: int = topics.DEFAULT_ITERATIONS
    min_df: int = topics.DEFAULT_MIN_DF
    kernel: str = propagation.METHOD_RBF
    spread_alpha: float = propagation.DEFAULT_ALPHA
    gamma: float = propagation.DEFAULT_GAMMA
    n_neighbors: int = propagation.DEFAULT_NEIGHBORS
    spread_max_iter: int = propagation.DEFAULT_MAX_ITER
    spread_tol: float = propagation.DEFAULT_TOL
    label_policy: str = labeling.POLICY_UNION
    negative_rule: str = labeling.RULE_ANY_NEGATIVE
    review_sample_size: int = 150
    projection: bool = False
    perplexity: float = cluster.TSNE_DEFAULT_PERPLEXITY
    projection_iterations: int = 500
    top_terms_count: int = 25
    seed: int = 0

    @classmethod
    def from_mapping(cls, mapping: dict, base_dir: Path | None = None) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        missing = {"input_path", "out_dir"} - set(mapping)
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(sorted(missing))}")
        cfg = cls(**mapping)
        if base_dir is not None:
            for name in ("input_path", "out_dir", "lexicon_dir", "stopwords_path", "journal_path"):
                value = getattr(cfg, name)
                if value is not None and not Path(value).is_absolute():
                    setattr(cfg, name, str(base_dir / value))
        return cfg

    def validate(self) -> None:
        if self.input_format not in ("jsonl", "csv"):
            raise ConfigError(f"unknown input format: {self.input_format!r}")
        if not Path(self.input_path).exists():
            raise ConfigError(f"input file not found: {self.input_path}")
        if self.lexicon_dir is not None:
            lex = Path(self.lexicon_dir)
            if not lex.is_dir():
                raise ConfigError(f"lexicon directory not found: {self.lexicon_dir}")
            for name in LEXICON_FILES:
                if not (lex / name).is_file():
                    raise ConfigError(f"missing lexicon file: {lex / name}")
        if self.stopwords_path is not None and not Path(self.stopwords_path).is_file():
            raise ConfigError(f"stopword file not found: {self.stopwords_path}")
        if self.ngram_n < 1:
            raise ConfigError("ngram_n must be >= 1")
        if self.lda_topics < 1:
            raise ConfigError("lda_topics must be >= 1")
        if self.lda_iterations < 1:
            raise ConfigError("lda_iterations must be >= 1")
        if self.min_df < 1:
            raise ConfigError("min_df must be >= 1")
        if self.kernel not in (propagation.METHOD_RBF, propagation.METHOD_KNN):
            raise ConfigError(f"unknown kernel: {self.kernel!r}")
        if not 0 < self.spread_alpha < 1:
            raise ConfigError("spread_alpha must lie strictly between 0 and 1")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.n_neighbors < 1:
            raise ConfigError("n_neighbors must be >= 1")
        if self.spread_tol < 0:
            raise ConfigError("spread_tol must be >= 0")
        if self.label_policy not in (labeling.POLICY_INTERSECTION, labeling.POLICY_UNION):
            raise ConfigError(f"unknown label policy: {self.label_policy!r}")
        if self.negative_rule not in (labeling.RULE_ANY_NEGATIVE, labeling.RULE_BOTH_NEGATIVE):
            raise ConfigError(f"unknown negative rule: {self.negative_rule!r}")
        if self.review_sample_size < 0:
            raise ConfigError("review_sample_size must be >= 0")
        if self.top_terms_count < 1:
            raise ConfigError("top_terms_count must be >= 1")

    def effective_lda_alpha(self) -> float:
        return self.lda_alpha if self.lda_alpha is not None else topics.default_alpha(self.lda_topics)

    def journal(self) -> Path:
        if self.journal_path is not None:
            return Path(self.journal_path)
        return Path(self.out_dir) / JOURNAL_FILE

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(
    path: str | Path,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> PipelineConfig:
    """Read a TOML or JSON config file; CLI overrides win over file values."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        mapping = json.loads(path.read_text(encoding="utf-8"))
    else:
        with path.open("rb") as fh:
            mapping = tomllib.load(fh)
    if not isinstance(mapping, dict):
        raise ConfigError("config root must be a table/object")
    cfg = PipelineConfig.from_mapping(mapping, base_dir=path.parent.resolve())
    if seed is not None:
        cfg.seed = seed
    if out_dir is not None:
        cfg.out_dir = out_dir
    return cfg


# --- hashing and manifest ----------------------------------------------------


def _file_hash(path: Path) -> str:
    if not path.exists():
        return ""
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _key_of(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    config: dict
    corpus_hash: str = ""
    stages: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "corpus_hash": self.corpus_hash,
            "stages": self.stages,
            "counts": self.counts,
            "results": self.results,
        }


@dataclass(frozen=True)
class ResultRow:
    listing_id: str
    score_pos: float
    score_neg: float
    hard_label: str  # "positive" | "negative"
    seeded: bool


def write_results_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    lines = ["listing_id,score_pos,score_neg,hard_label,seeded"]
    for row in rows:
        lines.append(
            f"{row.listing_id},{row.score_pos!r},{row.score_neg!r},"
            f"{row.hard_label},{int(row.seeded)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_results_csv(path: str | Path) -> list[ResultRow]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "listing_id,score_pos,score_neg,hard_label,seeded":
        raise ValueError("unexpected results CSV header")
    rows = []
    for line in lines[1:]:
        listing_id, pos, neg, hard, seeded = line.split(",")
        rows.append(ResultRow(listing_id, float(pos), float(neg), hard, seeded == "1"))
    return rows


def write_raw_text_jsonl(raws: Sequence[corpus.RawListing], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for raw in raws:
            fh.write(
                json.dumps(
                    {
                        "id": raw.id,
                        "title": raw.title,
                        "body": raw.body,
                        "posted_at": raw.posted_at.isoformat(),
                        "region": raw.region,
                    }
                )
                + "\n"
            )


def read_raw_text_jsonl(path: str | Path) -> dict[str, dict]:
    records = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        records[record["id"]] = record
    return records


class Pipeline:
    """Runs stages against one output directory, tracking the manifest."""

    def __init__(self, config: PipelineConfig):
        config.validate()
        self.cfg = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = self._load_manifest()

    # -- manifest bookkeeping --

    def _load_manifest(self) -> RunManifest:
        path = self.out / MANIFEST_FILE
        if path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            return RunManifest(
                config=self.cfg.to_dict(),
                corpus_hash=data.get("corpus_hash", ""),
                stages=data.get("stages", {}),
                counts=data.get("counts", {}),
                results=data.get("results", {}),
            )
        return RunManifest(config=self.cfg.to_dict())

    def _save_manifest(self) -> None:
        payload = self.manifest.to_dict()
        (self.out / MANIFEST_FILE).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def _cached(self, stage: str, key: str, outputs: Sequence[str]) -> bool:
        entry = self.manifest.stages.get(stage)
        if not entry or entry.get("key") != key:
            return False
        return all((self.out / name).exists() for name in outputs)

    def _record(self, stage: str, key: str, outputs: Sequence[str], seconds: float, cached: bool) -> None:
        self.manifest.stages[stage] = {
            "key": key,
            "outputs": list(outputs),
            "seconds": round(seconds, 6),
            "cached": cached,
        }
        self._save_manifest()

    def _require(self, stage: str, filename: str, produced_by: str) -> Path:
        path = self.out / filename
        if not path.exists():
            raise StageError(stage, f"missing artifact {filename}; run '{produced_by}' first")
        return path

    # -- stages --

    def ingest(self) -> None:
        stage = "ingest"
        corpus_hash = _file_hash(Path(self.cfg.input_path))
        key = _key_of({"input": corpus_hash, "format": self.cfg.input_format})
        outputs = (LISTINGS_FILE, RAW_TEXT_FILE, REJECTED_FILE)
        self.manifest.corpus_hash = corpus_hash
        if self._cached(stage, key, outputs):
            self._record(stage, key, outputs, self.manifest.stages[stage]["seconds"], True)
            return
        started = time.perf_counter()
        try:
            result = corpus.ingest(self.cfg.input_path, format=self.cfg.input_format)
            normalized = [corpus.normalize(raw) for raw in result.listings]
            corpus.write_listings_jsonl(normalized, self.out / LISTINGS_FILE)
            write_raw_text_jsonl(result.listings, self.out / RAW_TEXT_FILE)
            corpus.write_rejected_log(result.rejected, self.out / REJECTED_FILE)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        self.manifest.counts["raw"] = len(result.listings)
        self.manifest.counts["rejected"] = len(result.rejected)
        self._record(stage, key, outputs, time.perf_counter() - started, False)

    def features(self) -> None:
        stage = "features"
        listings_path = self._require(stage, LISTINGS_FILE, "ingest")
        lex_hash = ""
        if self.cfg.lexicon_dir is not None:
            lex_dir = Path(self.cfg.lexicon_dir)
            lex_hash = _key_of({name: _file_hash(lex_dir / name) for name in LEXICON_FILES})
        key = _key_of(
            {
                "listings": _file_hash(listings_path),
                "ngram_n": self.cfg.ngram_n,
                "lexicons": lex_hash,
            }
        )
        outputs = (NGRAM_FILE, FEATURES_FILE)
        if self._cached(stage, key, outputs):
            self._record(stage, key, outputs, self.manifest.stages[stage]["seconds"], True)
            return
        started = time.perf_counter()
        try:
            listings = corpus.read_listings_jsonl(listings_path)
            if listings:
                model = features.fit_ngram_model(listings, n=self.cfg.ngram_n)
            else:
                model = features.NgramModel(n=self.cfg.ngram_n, selected_ngrams=(), idf={})
            lex = features.load_lexicons(self.cfg.lexicon_dir)
            vectors = [features.extract_feature_vector(l, model, lex) for l in listings]
            features.save_ngram_model(model, self.out / NGRAM_FILE)
            features.write_feature_csv(vectors, self.out / FEATURES_FILE)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        self._record(stage, key, outputs, time.perf_counter() - started, False)

    def filter(self) -> None:
        stage = "filter"
        features_path = self._require(stage, FEATURES_FILE, "features")
        key = _key_of(
            {
                "features": _file_hash(features_path),
                "sample_size": self.cfg.review_sample_size,
                "seed": self.cfg.seed,
                "projection": self.cfg.projection,
                "perplexity": self.cfg.perplexity,
                "projection_iterations": self.cfg.projection_iterations,
            }
        )
        outputs = [FILTERED_FILE, SAMPLE_FILE]
        if self.cfg.projection:
            outputs.append(PROJECTION_FILE)
        if self._cached(stage, key, outputs):
            self._record(stage, key, outputs, self.manifest.stages[stage]["seconds"], True)
            return
        started = time.perf_counter()
        try:
            vectors = features.read_feature_csv(features_path)
            report = cluster.filter_corpus(vectors)
            (self.out / FILTERED_FILE).write_text(
                "".join(f"{i}\n" for i in report.kept_ids), encoding="utf-8"
            )
            # the sample op rejects oversized requests; the pipeline clamps
            # instead so small corpora still run end to end
            sample_n = min(self.cfg.review_sample_size, len(report.kept_ids))
            sample = labeling.sample_for_review(report.kept_ids, sample_n, seed=self.cfg.seed)
            (self.out / SAMPLE_FILE).write_text(
                "".join(f"{i}\n" for i in sample), encoding="utf-8"
            )
            if self.cfg.projection:
                self._write_projection(vectors, report)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        self.manifest.counts["filtered"] = len(report.kept_ids)
        self.manifest.counts["dropped"] = report.dropped_count
        self.manifest.counts["review_sample"] = sample_n
        self._record(stage, key, outputs, time.perf_counter() - started, False)

    def _write_projection(self, vectors, report) -> None:
        ids = [v.listing_id for v in vectors]
        points = np.array([v.bits() for v in vectors], dtype=np.float64)
        kept = set(report.kept_ids)
        membership = np.array([1 if i in kept else 0 for i in ids], dtype=np.int64)
        projection = cluster.project_with_clusters(
            ids,
            points,
            membership,
            perplexity=self.cfg.perplexity,
            iterations=self.cfg.projection_iterations,
            seed=self.cfg.seed,
        )
        lines = ["listing_id,x,y,cluster,kept"]
        for i, listing_id in enumerate(projection.ids):
            lines.append(
                f"{listing_id},{projection.coords[i, 0]!r},{projection.coords[i, 1]!r},"
                f"{projection.kmeans_assignment[i]},{membership[i]}"
            )
        (self.out / PROJECTION_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.manifest.counts["projection_purity"] = projection.purity

    def topics(self) -> None:
        stage = "topics"
        listings_path = self._require(stage, LISTINGS_FILE, "ingest")
        filtered_path = self._require(stage, FILTERED_FILE, "filter")
        stop_hash = _file_hash(Path(self.cfg.stopwords_path)) if self.cfg.stopwords_path else ""
        key = _key_of(
            {
                "listings": _file_hash(listings_path),
                "filtered": _file_hash(filtered_path),
                "k": self.cfg.lda_topics,
                "alpha": self.cfg.effective_lda_alpha(),
                "beta": self.cfg.lda_beta,
                "iterations": self.cfg.lda_iterations,
                "min_df": self.cfg.min_df,
                "stopwords": stop_hash,
                "seed": self.cfg.seed,
            }
        )
        outputs = (THETA_FILE,)
        if self._cached(stage, key, outputs):
            self._record(stage, key, outputs, self.manifest.stages[stage]["seconds"], True)
            return
        started = time.perf_counter()
        try:
            filtered_ids = filtered_path.read_text(encoding="utf-8").split()
            by_id = {l.id: l for l in corpus.read_listings_jsonl(listings_path)}
            selected = [by_id[i] for i in filtered_ids]
            stopwords = features.load_stopwords(self.cfg.stopwords_path)
            docs = topics.prepare_docs(selected, stopwords, min_df=self.cfg.min_df)
            if selected and any(docs):
                result = topics.fit_lda(
                    docs,
                    k=self.cfg.lda_topics,
                    alpha=self.cfg.effective_lda_alpha(),
                    beta=self.cfg.lda_beta,
                    iterations=self.cfg.lda_iterations,
                    seed=self.cfg.seed,
                )
                topics.save_topic_model(result.model, self.out / TOPIC_MODEL_FILE)
                topics.write_theta_csv(filtered_ids, result.doc_topic, self.out / THETA_FILE)
            else:
                # nothing to model; keep downstream stages runnable
                topics.write_theta_csv(
                    filtered_ids,
                    np.full((len(filtered_ids), self.cfg.lda_topics), 1.0 / self.cfg.lda_topics),
                    self.out / THETA_FILE,
                )
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        self._record(stage, key, outputs, time.perf_counter() - started, False)

    def spread(self) -> None:
        stage = "spread"
        theta_path = self._require(stage, THETA_FILE, "topics")
        journal_path = self.cfg.journal()
        key = _key_of(
            {
                "theta": _file_hash(theta_path),
                "journal": _file_hash(journal_path),
                "kernel": self.cfg.kernel,
                "alpha": self.cfg.spread_alpha,
                "gamma": self.cfg.gamma,
                "n_neighbors": self.cfg.n_neighbors,
                "max_iter": self.cfg.spread_max_iter,
                "tol": self.cfg.spread_tol,
                "policy": self.cfg.label_policy,
                "negative_rule": self.cfg.negative_rule,
            }
        )
        outputs = (RESULTS_FILE,)
        if self._cached(stage, key, outputs):
            self._record(stage, key, outputs, self.manifest.stages[stage]["seconds"], True)
            return
        started = time.perf_counter()
        try:
            ids, thetas = topics.read_theta_csv(theta_path)
            journal = labeling.read_journal(journal_path)
            verdicts = labeling.stage_verdicts(journal, "initial")
            matrix = labeling.build_label_matrix(
                verdicts, ids, policy=self.cfg.label_policy, negative_rule=self.cfg.negative_rule
            )
            rows: list[ResultRow] = []
            if ids:
                result = propagation.spread_labels(
                    thetas,
                    matrix.y,
                    method=self.cfg.kernel,
                    alpha=self.cfg.spread_alpha,
                    gamma=self.cfg.gamma,
                    n_neighbors=min(self.cfg.n_neighbors, max(1, len(ids) - 1)),
                    max_iter=self.cfg.spread_max_iter,
                    tol=self.cfg.spread_tol,
                )
                seeded = matrix.y.sum(axis=1) > 0
                for i, listing_id in enumerate(ids):
                    rows.append(
                        ResultRow(
                            listing_id=listing_id,
                            score_pos=float(result.scores[i, 0]),
                            score_neg=float(result.scores[i, 1]),
                            hard_label="positive" if result.labels[i] == 0 else "negative",
                            seeded=bool(seeded[i]),
                        )
                    )
                self.manifest.results["iterations"] = result.iterations
                self.manifest.results["converged"] = result.converged
            write_results_csv(rows, self.out / RESULTS_FILE)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        self.manifest.results.update(
            {
                "kernel": self.cfg.kernel,
                "policy": self.cfg.label_policy,
                "negative_rule": self.cfg.negative_rule,
                "positive_seeds": matrix.positive_seeds,
                "negative_seeds": matrix.negative_seeds,
                "label_conflicts": matrix.conflicts,
            }
        )
        self._record(stage, key, outputs, time.perf_counter() - started, False)

    def report(self) -> dict:
        stage = "report"
        started = time.perf_counter()
        try:
            stats = compute_stats(self.cfg)
            write_report_bundle(stats, self.out, top_n=self.cfg.top_terms_count)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        self.manifest.counts.update(stats["dataset"])
        self.manifest.results.update(
            {k: v for k, v in stats["results"].items() if k not in ("candidates",)}
        )
        outputs = (
            REPORT_FILE,
            DATASET_SUMMARY_FILE,
            AGREEMENT_FILE,
            RESULTS_SUMMARY_FILE,
            PHONE_HISTOGRAM_FILE,
            TOP_TERMS_FILE,
        )
        self._record(stage, "", outputs, time.perf_counter() - started, False)
        return stats

    def run_all(self) -> RunManifest:
        self.ingest()
        self.features()
        self.filter()
        self.topics()
        self.spread()
        self.report()
        return self.manifest


def run_pipeline(config: PipelineConfig) -> RunManifest:
    return Pipeline(config).run_all()


# --- stats: single source of truth for reports and the HTTP service ---------


def compute_stats(cfg: PipelineConfig) -> dict:
    """Recompute every reported number from the persisted artifacts.

    The journal is re-read on every call, so labeling progress shows up
    without any cache invalidation.
    """
    out = Path(cfg.out_dir)
    listings = (
        corpus.read_listings_jsonl(out / LISTINGS_FILE) if (out / LISTINGS_FILE).exists() else []
    )
    rejected = 0
    if (out / REJECTED_FILE).exists():
        rejected = sum(
            1 for line in (out / REJECTED_FILE).read_text(encoding="utf-8").splitlines() if line
        )
    filtered_ids = (
        (out / FILTERED_FILE).read_text(encoding="utf-8").split()
        if (out / FILTERED_FILE).exists()
        else []
    )
    sample_ids = (
        (out / SAMPLE_FILE).read_text(encoding="utf-8").split()
        if (out / SAMPLE_FILE).exists()
        else []
    )
    journal = labeling.read_journal(cfg.journal())
    summary = labeling.agreement(journal, universe=filtered_ids)
    labeled = len(filtered_ids) - summary.unlabeled_count

    rows = read_results_csv(out / RESULTS_FILE) if (out / RESULTS_FILE).exists() else []
    candidates = [r for r in rows if not r.seeded and r.hard_label == "positive"]
    learner_negative = sum(1 for r in rows if not r.seeded and r.hard_label == "negative")
    verification = labeling.verification_status(journal)
    confirmed = sum(
        1 for r in candidates if any(verification.get(r.listing_id, {}).values())
    )
    verified_any = sum(1 for r in candidates if r.listing_id in verification)
    if verified_any == 0:
        precision = "pending"
    else:
        precision_summary = propagation.evaluate_precision(len(candidates), confirmed)
        precision = precision_summary.percent  # None when nothing assigned

    phone_stats = corpus.phone_report(listings)
    positives = {r.listing_id for r in rows if r.hard_label == "positive"}
    stopwords = features.load_stopwords(cfg.stopwords_path)
    terms = propagation.top_terms(
        (l.tokens for l in listings if l.id in positives),
        stopwords,
        n=cfg.top_terms_count,
    )

    experts = sorted(set(summary.per_expert_pos) | set(summary.per_expert_neg))
    return {
        "dataset": {
            "raw": len(listings),
            "rejected": rejected,
            "filtered": len(filtered_ids),
            "dropped": len(listings) - len(filtered_ids),
            "review_sample": len(sample_ids),
            "labeled": labeled,
            "unlabeled": summary.unlabeled_count,
        },
        "agreement": {
            "experts": {
                e: {
                    "positive": summary.per_expert_pos.get(e, 0),
                    "negative": summary.per_expert_neg.get(e, 0),
                }
                for e in experts
            },
            "intersection": {
                "positive": summary.intersection_pos,
                "negative": summary.intersection_neg,
            },
            "union": {"positive": summary.union_pos, "negative": summary.union_neg},
        },
        "results": {
            "kernel": cfg.kernel,
            "policy": cfg.label_policy,
            "learner_positive": len(candidates),
            "learner_negative": learner_negative,
            "expert_confirmed": confirmed,
            "verified": verified_any,
            "precision": precision,
        },
        "phones": dict(sorted(phone_stats.per_region_phone_counts.items())),
        "top_terms": terms,
    }


def write_report_bundle(stats: dict, out_dir: Path, top_n: int = 25) -> None:
    out = Path(out_dir)
    dataset = stats["dataset"]
    agreement = stats["agreement"]
    results = stats["results"]

    lines = ["metric,value"]
    for name in ("raw", "rejected", "filtered", "dropped", "review_sample", "labeled", "unlabeled"):
        lines.append(f"{name},{dataset[name]}")
    (out / DATASET_SUMMARY_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["group,positive,negative"]
    for expert, counts in agreement["experts"].items():
        lines.append(f"expert:{expert},{counts['positive']},{counts['negative']}")
    lines.append(
        f"intersection,{agreement['intersection']['positive']},{agreement['intersection']['negative']}"
    )
    lines.append(f"union,{agreement['union']['positive']},{agreement['union']['negative']}")
    (out / AGREEMENT_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")

    precision = results["precision"]
    precision_cell = precision if precision is not None else "n/a"
    (out / RESULTS_SUMMARY_FILE).write_text(
        "kernel,policy,learner_positive,learner_negative,expert_confirmed,precision\n"
        f"{results['kernel']},{results['policy']},{results['learner_positive']},"
        f"{results['learner_negative']},{results['expert_confirmed']},{precision_cell}\n",
        encoding="utf-8",
    )

    lines = ["region,distinct_phones"]
    ordered = sorted(stats["phones"].items(), key=lambda kv: (-kv[1], kv[0]))
    for region, count in ordered:
        lines.append(f"{region},{count}")
    (out / PHONE_HISTOGRAM_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["term,count"]
    for term, count in stats["top_terms"][:top_n]:
        lines.append(f"{term},{count}")
    (out / TOP_TERMS_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")

    text = ["DATASET"]
    for name in ("raw", "rejected", "filtered", "dropped", "review_sample", "labeled", "unlabeled"):
        text.append(f"  {name:<16} {dataset[name]}")
    text.append("")
    text.append(f"AGREEMENT{'':<12} positive  negative")
    for expert, counts in agreement["experts"].items():
        text.append(f"  expert {expert:<12} {counts['positive']:>8}  {counts['negative']:>8}")
    text.append(
        f"  {'intersection':<18} {agreement['intersection']['positive']:>7}"
        f"  {agreement['intersection']['negative']:>8}"
    )
    text.append(
        f"  {'union':<18} {agreement['union']['positive']:>7}"
        f"  {agreement['union']['negative']:>8}"
    )
    text.append("")
    text.append(f"RESULTS (kernel={results['kernel']}, policy={results['policy']})")
    text.append(f"  learner positive   {results['learner_positive']}")
    text.append(f"  learner negative   {results['learner_negative']}")
    text.append(f"  expert confirmed   {results['expert_confirmed']}")
    suffix = "%" if isinstance(precision, str) and precision not in ("pending",) else ""
    text.append(f"  precision          {precision_cell}{suffix}")
    text.append("")
    text.append("TOP TERMS (predicted positive)")
    for term, count in stats["top_terms"][:top_n]:
        text.append(f"  {term:<20} {count}")
    text.append("")
    text.append("PHONES (distinct per region)")
    for region, count in ordered:
        text.append(f"  {region:<20} {count}")
    (out / REPORT_FILE).write_text("\n".join(text) + "\n", encoding="utf-8")
