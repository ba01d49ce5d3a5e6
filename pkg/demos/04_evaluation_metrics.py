"""
Answer-set metrics
==================

Hit@1, F1, Recall and Accuracy over normalized answer strings, as used to
score retrieval-augmented QA runs.
"""

from grag import EvalRecord, compute_metric

records = [
    EvalRecord(id="q1", prediction=("Paris",), gold=("paris",)),
    EvalRecord(id="q2", prediction=("berlin", "bonn"), gold=("bonn", "hamburg")),
    EvalRecord(id="q3", prediction=(), gold=("oslo",)),
]

for metric in ("hit1", "f1", "recall"):
    print(f"{metric:>7}: {compute_metric(records, metric):.4f}")

# Accuracy expects exactly one prediction per record.
acc_records = [
    EvalRecord(id="q1", prediction=("yes",), gold=("Yes",)),
    EvalRecord(id="q2", prediction=("no",), gold=("yes",)),
]
print(f"{'acc':>7}: {compute_metric(acc_records, 'acc'):.4f}")
