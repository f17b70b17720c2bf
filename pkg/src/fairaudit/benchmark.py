"""Static reference fixture: fairness/performance numbers for a seventeen-
strategy credit-lending audit, one row per mitigation strategy plus the
three unmitigated baselines. Used by the comparison tests and as the demo
experiment the service can seed into a store.

AUROC is absent for strategies whose output is hard 0/1 decisions
(randomized or thresholded classifiers).
"""

from __future__ import annotations

from .compare import ModelEntry

FINGERPRINT = "reference-benchmark-v1"

_ROWS = [
    # id, family, dp, eo, eopp, pp, auroc, accuracy, f1
    ("logistic", "no-mitigation", 0.324, 0.272, 0.272, 0.032, 0.817, 0.761, 0.823),
    ("random_forest", "no-mitigation", 0.221, 0.202, -0.104, 0.068, 0.838, 0.804, 0.875),
    ("neural_net", "no-mitigation", 0.219, 0.198, 0.104, 0.072, 0.830, 0.811, 0.876),
    ("ftu", "pre", 0.164, 0.124, 0.058, 0.095, 0.838, 0.812, 0.876),
    ("suppression", "pre", 0.099, -0.053, 0.065, 0.152, 0.753, 0.748, 0.840),
    ("massaging", "pre", -0.004, 0.062, 0.062, 0.163, 0.818, 0.868, 0.803),
    ("sampling", "pre", 0.080, 0.012, 0.012, 0.115, 0.835, 0.791, 0.851),
    ("cff", "causal", 0.218, 0.192, 0.104, 0.070, 0.832, 0.810, 0.874),
    ("adv_dp", "in", -0.034, 0.073, 0.063, 0.176, 0.823, 0.802, 0.869),
    ("adv_eo", "in", 0.102, 0.029, -0.010, 0.148, 0.819, 0.805, 0.871),
    ("adv_cdp", "in", 0.147, 0.101, -0.050, 0.112, 0.830, 0.807, 0.872),
    ("reductions_gs", "in", 0.012, 0.077, 0.049, 0.159, 0.812, 0.794, 0.864),
    ("reductions_eg", "in", 0.007, 0.084, 0.051, 0.161, None, 0.794, 0.864),
    ("thresh_dp", "post", 0.003, 0.099, 0.056, 0.164, None, 0.805, 0.872),
    ("thresh_eo", "post", 0.082, 0.006, 0.006, 0.138, None, 0.812, 0.873),
    ("thresh_eopp", "post", 0.100, 0.048, 0.005, 0.119, None, 0.809, 0.874),
    ("thresh_cdp", "post", 0.186, 0.159, 0.072, 0.083, None, 0.810, 0.875),
]


def reference_entries() -> list[ModelEntry]:
    entries = []
    for sid, family, dp, eo, eopp, pp, auroc, acc, f1 in _ROWS:
        entries.append(
            ModelEntry(
                strategy_id=sid,
                family=family,
                fairness={"dp": dp, "eo": eo, "eopp": eopp, "pp": pp},
                performance={
                    "accuracy": acc,
                    "f1": f1,
                    "auroc": auroc,
                    "precision": None,
                    "recall": None,
                },
                fingerprint=FINGERPRINT,
            )
        )
    return entries
