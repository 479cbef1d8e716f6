import csv
import io

import pytest

import reclda


def test_csv_quoted_comma_matches_stdlib():
    text = 'id,question\r\nq1,"Sort a, b and c"\r\nq2,"He said ""hi"""\r\nq3,"two\nlines"\r\n'
    expected = list(csv.DictReader(io.StringIO(text, newline="")))
    records = reclda.ingest_csv(text)
    assert [(r.id, r.text) for r in records] == [(row["id"], row["question"]) for row in expected]


def test_preprocess_and_fit():
    records = [reclda.RawRecord("1", "Binary search tree insert"), reclda.RawRecord("2", "Reverse a linked list"),
               reclda.RawRecord("3", "")]
    corpus = reclda.preprocess(records)
    assert corpus.size == 2
    assert corpus.doc_ids == ["1", "2"]
    model = reclda.fit(corpus, reclda.LdaConfig(k=2, sweeps=20, burn_in=10, seed=1))
    assert len(model.theta) == 2
    assert all(abs(sum(row) - 1.0) < 1e-9 for row in model.theta)
    assert 1 <= reclda.effective_topic_count(model) <= 2
    again = reclda.fit(corpus, reclda.LdaConfig(k=2, sweeps=20, burn_in=10, seed=1))
    assert again.to_json() == model.to_json()


def test_hdp_and_recursion_on_synthetic_corpus():
    corpus = reclda.synthesize_corpus(true_k=3, docs=60, vocab=40, doc_len=20, seed=2)
    cfg = reclda.HdpConfig()
    cfg.sweeps = 30
    cfg.burn_in = 15
    cfg.seed = 3
    est = reclda.fit_hdp(corpus, cfg)
    assert est.hdp3 <= est.hdp2 <= est.hdp1
    assert abs(sum(est.topic_weights) - 1.0) < 1e-9
    trace = reclda.run_recursion(corpus, est.hdp2, sweeps=30, burn_in=15, seed=4)
    assert trace.outcome in {"Success", "FailureGammaDrop", "FailureSteadyDecrease", "FailureStepCap"}
    assert trace.steps[0].k_specified == est.hdp2


def test_escalate_and_guards():
    hdp1, hdp2, hdp3, thresholds, degenerate = reclda.escalate([0.5, 0.3, 0.1, 0.05, 0.05], 100)
    assert (hdp1, hdp2, hdp3) == (5, 2, 1)
    assert degenerate == [False, False, True]
    assert thresholds[1] == pytest.approx(0.2)
    trace = reclda.run_scripted_recursion([21, 17, 15, 15], 30)
    assert trace.outcome == "Success"
    assert [round(s.efficiency_ratio, 3) for s in trace.steps] == [0.7, 0.81, 0.882, 1.0]
    assert reclda.run_scripted_recursion([45, 27], 50).outcome == "FailureGammaDrop"


def test_mean_mode_and_errors():
    assert reclda.mean_mode([2, 2, 4, 4, 9]) == 4
    assert reclda.mean_mode([2, 2, 4, 4, 3]) == 2
    with pytest.raises(ValueError):
        reclda.ingest_csv("id,body\n1,x\n")


def test_cli_entry_point(tmp_path):
    code, out, err = reclda.run_cli(["--seed", "1", "--output-dir", str(tmp_path), "synth", "--docs", "20"])
    assert code == 0, err
    assert (tmp_path / "synth.csv").exists()
