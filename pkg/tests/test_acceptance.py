"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured values."""

import json
import random
import time

import numpy as np

from mmr_oracle import mmr_brute_force
from longdoc.classifier import (
    LinearHead,
    clip_gradients,
    loss_and_grad,
    lr_at,
)
from longdoc.cli import main
from longdoc.corpus import Document, LabelVocab, generate_synthetic, save_corpus, split_stratified
from longdoc.metrics import ConfusionMatrix, report
from longdoc.mmr import MmrConfig, angular_similarity, mmr_select
from longdoc.pipeline import PipelineConfig, evaluate_pipeline, train_pipeline
from longdoc.segmenter import SegmentConfig, segment, tokenize_count


def announce(name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name} {detail}")
    assert ok, f"{name}: {detail}"


class TestMmrOracleEquivalence:
    def test_thousand_random_instances(self):
        rng = random.Random(2024)
        lambdas = [0.0, 0.3, 0.5, 0.7, 1.0]
        kernels = ["angular", "cosine", "euclidean", "jaccard"]
        start = time.monotonic()
        mismatches = 0
        for case in range(1000):
            n = rng.randrange(2, 13)
            dim = rng.randrange(2, 9)
            vectors = []
            while len(vectors) < n:
                v = [rng.uniform(-1, 1) for _ in range(dim)]
                if any(abs(x) > 1e-3 for x in v):
                    vectors.append(v)
            query = [rng.uniform(-1, 1) for _ in range(dim)]
            while all(abs(x) < 1e-3 for x in query):
                query = [rng.uniform(-1, 1) for _ in range(dim)]
            token_sets = {i: set(rng.sample("abcdefghij", rng.randrange(1, 6))) for i in range(n)}
            query_tokens = set(rng.sample("abcdefghij", 4))
            lam = lambdas[case % len(lambdas)]
            sim = kernels[case % len(kernels)]
            k = rng.randrange(1, n + 1)
            sel = mmr_select(
                [(i, np.array(v)) for i, v in enumerate(vectors)],
                np.array(query),
                MmrConfig(lam=lam, k=k, sim1=sim, sim2=sim),
                token_sets=token_sets,
                query_tokens=query_tokens,
            )
            want, _ = mmr_brute_force(
                [(i, v) for i, v in enumerate(vectors)],
                query,
                lam,
                k,
                sim,
                sim,
                token_sets=token_sets,
                query_tokens=query_tokens,
            )
            if list(sel.chosen) != want:
                mismatches += 1
        elapsed = time.monotonic() - start
        announce(
            "MMR oracle equivalence (1000 instances)",
            mismatches == 0 and elapsed < 10.0,
            f"mismatches={mismatches} elapsed={elapsed:.2f}s",
        )


class TestAngularExactPoints:
    def test_exact_points(self):
        u = np.array([0.3, -0.4, 1.2])
        v_orth = np.array([1.0, 0.0])
        w_orth = np.array([0.0, 2.0])
        errs = [
            abs(angular_similarity(u, u) - 1.0),
            abs(angular_similarity(v_orth, w_orth) - 0.5),
            abs(angular_similarity(u, -u) - 0.0),
        ]
        announce(
            "Angular similarity exact points",
            all(e < 1e-12 for e in errs),
            f"errors={errs}",
        )


class TestGradientCheck:
    def test_hundred_random_instances(self):
        rng = np.random.default_rng(77)
        h = 1e-5
        worst = 0.0
        for _ in range(100):
            k = int(rng.integers(2, 6))
            d = int(rng.integers(2, 17))
            n = int(rng.integers(1, 7))
            vocab = LabelVocab(tuple(f"c{i}" for i in range(k)))
            w = rng.normal(size=(k, d))
            b = rng.normal(size=k)
            xs = rng.normal(size=(n, d))
            ys = rng.integers(0, k, size=n)
            head = LinearHead(w.copy(), b.copy(), vocab)
            _, gw, gb = loss_and_grad(head, xs, ys)

            def loss_of():
                return loss_and_grad(LinearHead(w, b, vocab), xs, ys)[0]

            for arr, grad in ((w, gw), (b, gb)):
                fd = np.zeros_like(arr)
                it = np.nditer(arr, flags=["multi_index"])
                for _v in it:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + h
                    up = loss_of()
                    arr[idx] = orig - h
                    down = loss_of()
                    arr[idx] = orig
                    fd[idx] = (up - down) / (2 * h)
                # relative error of the whole gradient vector: robust where
                # individual entries are near zero and cancellation dominates
                rel = np.linalg.norm(fd - grad) / max(
                    np.linalg.norm(fd), np.linalg.norm(grad), 1e-12
                )
                worst = max(worst, float(rel))
        announce("Cross-entropy gradient check (100 instances)", worst < 1e-4, f"worst_rel={worst:.2e}")


ARABIC = "كتاب مدرسة طالب علم مدينة بحر شمس قمر ليل نهار سلام حرب قلم ورقة نهر جبل".split()
LATIN = "alpha beta gamma delta epsilon zeta theta".split()
MARKS = [".", "!", "؟", "؛", "…"]


def fuzz_text(rng):
    parts = []
    for _ in range(rng.randrange(1, 150)):
        roll = rng.random()
        if roll < 0.55:
            parts.append(rng.choice(ARABIC))
        elif roll < 0.75:
            parts.append(rng.choice(LATIN))
        elif roll < 0.85:
            parts.append(f"{rng.randrange(1000)}.{rng.randrange(100)}")
        elif roll < 0.93:
            parts.append(rng.choice(ARABIC) + rng.choice(MARKS))
        elif roll < 0.97:
            parts.append(rng.choice(ARABIC) + "،")
        else:
            parts.append("\n")
    text = " ".join(parts)
    return text if text.strip() else "نص قصير"


class TestSegmenterInvariants:
    def test_thousand_document_fuzz(self):
        rng = random.Random(31337)
        config = SegmentConfig()
        violations = []
        for i in range(1000):
            doc = Document(f"f{i}", fuzz_text(rng))
            sents = segment(doc, config)
            if " ".join(" ".join(s.text for s in sents).split()) != " ".join(doc.text.split()):
                violations.append((i, "coverage"))
            if [s.index for s in sents] != list(range(len(sents))):
                violations.append((i, "order"))
            if any(s.token_count > config.max_tokens for s in sents):
                violations.append((i, "budget-max"))
            under = [s.index for s in sents if s.token_count < config.min_tokens]
            if len(under) > 1 or (under and under[0] != len(sents) - 1):
                violations.append((i, "budget-min"))
            for s in sents:
                again = segment(Document(doc.doc_id, s.text), config)
                if len(again) != 1 or again[0].text != s.text:
                    violations.append((i, "idempotence"))
                    break
        announce(
            "Segmenter invariants (1000-doc fuzz)",
            not violations,
            f"violations={violations[:5]}",
        )


class TestMetricsOracle:
    def test_fifty_random_matrices(self):
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(50):
            k = int(rng.integers(2, 9))
            vocab = LabelVocab(tuple(f"c{i}" for i in range(k)))
            counts = rng.integers(0, 20, size=(k, k))
            if counts.sum() == 0:
                counts[0, 0] = 1
            r = report(ConfusionMatrix(counts, vocab))
            # independent implementation straight from the definitions
            precisions, recalls, f1s = [], [], []
            for i in range(k):
                tp = counts[i, i]
                fp = counts[:, i].sum() - tp
                fn = counts[i, :].sum() - tp
                p = tp / (tp + fp) if tp + fp else 0.0
                rc = tp / (tp + fn) if tp + fn else 0.0
                f = 2 * p * rc / (p + rc) if p + rc else 0.0
                precisions.append(p)
                recalls.append(rc)
                f1s.append(f)
            worst = max(
                worst,
                abs(r.macro_precision - sum(precisions) / k),
                abs(r.macro_recall - sum(recalls) / k),
                abs(r.macro_f1 - sum(f1s) / k),
                abs(r.accuracy - np.trace(counts) / counts.sum()),
                max(abs(c.f1 - f1s[i]) for i, c in enumerate(r.per_class)),
            )
        announce("Metrics oracle (50 random matrices)", worst < 1e-12, f"worst_abs={worst:.2e}")


class TestEndToEndOrdering:
    def test_proposed_strategies_beat_truncation(self):
        start = time.monotonic()
        docs, vocab = generate_synthetic(
            n_classes=8, docs_per_class=50, sentences_per_doc=40, signal_ratio=0.3, seed=13
        )
        manifest = split_stratified(docs, seed=13)
        mean_tokens = sum(tokenize_count(d.text) for d in docs) / len(docs)
        truncate_tokens = max(1, int(0.1 * mean_tokens))
        base = {
            "provider": {"kind": "reference", "dim": 256, "seed": 0},
            "train": {"epochs": 20, "learning_rate": 0.05, "seed": 13},
            "truncate_tokens": truncate_tokens,
            "workers": 1,
        }
        scores = {}
        for strategy in ("aggregate", "mmr", "truncate"):
            raw = dict(base, strategy=strategy)
            if strategy == "mmr":
                raw["mmr"] = {"lam": 0.5, "k": 64}
            config = PipelineConfig.from_dict(raw)
            result = train_pipeline(docs, vocab, manifest, config)
            rep, _ = evaluate_pipeline(docs, vocab, manifest, result.head, config)
            scores[strategy] = rep.macro_f1
        elapsed = time.monotonic() - start
        ok = (
            scores["aggregate"] >= 0.90
            and scores["mmr"] >= 0.90
            and scores["aggregate"] - scores["truncate"] >= 0.05
            and scores["mmr"] - scores["truncate"] >= 0.05
            and elapsed < 300
        )
        announce(
            "End-to-end ordering (proposed strategies beat truncation)",
            ok,
            f"macro_f1={ {k: round(v, 4) for k, v in scores.items()} } "
            f"truncate_tokens={truncate_tokens} elapsed={elapsed:.1f}s",
        )


class TestDeterminism:
    def test_train_and_eval_reproducible(self, tmp_path):
        docs, _ = generate_synthetic(3, 10, 8, 0.5, seed=4)
        corpus = tmp_path / "corpus.jsonl"
        save_corpus(docs, corpus)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "provider": {"kind": "reference", "dim": 128},
                    "train": {"epochs": 3, "learning_rate": 0.05, "seed": 2},
                    "workers": 1,
                }
            ),
            encoding="utf-8",
        )
        outputs = []
        for run in ("r1", "r2"):
            d = tmp_path / run
            d.mkdir()
            ckpt, manifest, rep = d / "head.json", d / "m.json", d / "report.json"
            assert (
                main(
                    [
                        "train", "--corpus", str(corpus), "--config", str(cfg),
                        "--manifest", str(manifest), "--out", str(ckpt),
                    ]
                )
                == 0
            )
            assert (
                main(
                    [
                        "eval", "--corpus", str(corpus), "--manifest", str(manifest),
                        "--checkpoint", str(ckpt), "--config", str(cfg), "--out", str(rep),
                    ]
                )
                == 0
            )
            outputs.append((ckpt.read_bytes(), rep.read_bytes()))
        ok = outputs[0][0] == outputs[1][0] and outputs[0][1] == outputs[1][1]
        announce("Determinism (identical checkpoints and reports)", ok)


class TestScheduleAndClipping:
    def test_exact_values(self):
        peak_ok = lr_at(10, 100, 0.1, 5e-5) == 5e-5
        g = np.array([6.0, 8.0])  # norm exactly 10
        clipped = clip_gradients([g], 1.0)[0]
        clip_ok = np.array_equal(clipped, g * 0.1)
        announce(
            "Schedule peak and clipping scale exact",
            peak_ok and clip_ok,
            f"lr(10/100)={lr_at(10, 100, 0.1, 5e-5)} clipped={clipped.tolist()}",
        )
