#!/usr/bin/env python3
"""Regenerate src/trust_gate/data/default_catalog.json.

The default catalog encodes the 13 published control families with their
declared counts (148 controls total), the phase-minimum score table, the
cumulative gate control counts, and priority minimum-score ranges. Control
titles are generic wherever the source material names none.
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "trust_gate" / "data" / "default_catalog.json"

PILLARS = [
    ("cybersecurity", 0.15),
    ("privacy", 0.15),
    ("ethics_bias", 0.15),
    ("transparency", 0.10),
    ("explainability", 0.10),
    ("regulations", 0.15),
    ("audit", 0.10),
    ("accountability", 0.10),
]

FAMILIES = [
    ("GRC", "Governance, Risk & Compliance", 14),
    ("DSP", "Data Security & Privacy", 24),
    ("IAM", "Identity & Access Management", 16),
    ("MDS", "Model Development & Security", 13),
    ("IVS", "Infrastructure Security", 13),
    ("TVM", "Threat & Vulnerability Management", 9),
    ("LOG", "Logging & Monitoring", 15),
    ("SIM", "Security Incident Management", 7),
    ("BCR", "Business Continuity", 11),
    ("EKM", "Encryption & Key Management", 5),
    ("SEF", "Safety & Failure Management", 9),
    ("AMA", "Asset Management", 6),
    ("A&A", "Assessment & Audit", 6),
]

# Default pillar mapping per family; first pillar is primary.
FAMILY_PILLARS = {
    "GRC": ["regulations", "accountability"],
    "DSP": ["privacy"],
    "IAM": ["privacy", "cybersecurity"],
    "MDS": ["cybersecurity"],
    "IVS": ["cybersecurity"],
    "TVM": ["cybersecurity"],
    "LOG": ["audit", "explainability"],
    "SIM": ["cybersecurity", "audit"],
    "BCR": ["accountability", "transparency"],
    "EKM": ["privacy", "cybersecurity"],
    "SEF": ["cybersecurity", "accountability"],
    "AMA": ["transparency", "accountability"],
    "A&A": ["audit", "regulations"],
}

# Controls whose subject matter is known; everything else gets a generic title.
TITLES = {
    "GRC-01": "Governance Structure",
    "GRC-07": "Information System Regulatory Mapping",
    "GRC-10": "AI Impact Assessment",
    "GRC-11": "Fairness Testing",
    "GRC-13": "Explainability Review",
    "GRC-14": "Model Risk Assessment",
    "DSP-01": "Data Classification",
    "DSP-03": "Data Minimization",
    "DSP-04": "Data Access Controls",
    "DSP-07": "Data Masking & Anonymization",
    "DSP-11": "PII Detection in Training Data",
    "DSP-15": "Privacy Impact Assessment",
    "DSP-16": "Secure Data Deletion",
    "DSP-17": "Data Retention & Disposal",
    "DSP-18": "Federated Learning",
    "DSP-20": "Secure Multi-Party Computation",
    "MDS-01": "Model Risk Identification",
    "MDS-02": "Adversarial Attack Testing",
    "IVS-01": "Secure Architecture",
    "LOG-01": "Audit Logging Policy",
    "A&A-01": "Audit Policy",
    "A&A-02": "Independent Assessments",
    "A&A-03": "Risk Acceptance Authority",
    "AMA-01": "AI Asset Inventory",
    "AMA-02": "AI System Classification",
}

PILLAR_OVERRIDES = {
    "GRC-10": ["ethics_bias", "regulations"],
    "GRC-11": ["ethics_bias"],
    "GRC-13": ["explainability"],
    "GRC-14": ["accountability", "audit"],
    "DSP-07": ["privacy", "cybersecurity"],
    "DSP-11": ["privacy", "ethics_bias"],
    "GRC-01": ["accountability", "regulations"],
}

CRITICAL = {"DSP-01", "DSP-04", "GRC-01", "GRC-07", "GRC-10", "GRC-11", "MDS-02", "DSP-11", "DSP-15"}
LOW = {"DSP-18", "DSP-20"}

CHECK_BINDINGS = {
    "GRC-11": "demographic_parity",
    "MDS-02": "robustness_threshold",
    "DSP-11": "pii_scan",
}

# Earliest-gate assignments; ids assigned to several gates keep the earliest.
GATE_ASSIGNMENTS = {
    0: ["MDS-01", "DSP-15", "GRC-05", "GRC-12"],
    1: [f"DSP-{n:02d}" for n in range(1, 13)] + ["MDS-11", "LOG-01"],
    2: ["MDS-03", "MDS-06", "MDS-08", "SEF-01", "SEF-02", "SEF-03", "SEF-04", "SEF-05", "DSP-19"],
    3: ["MDS-02", "MDS-07", "TVM-05", "GRC-11", "DSP-13", "DSP-14"],
    4: ["MDS-04", "MDS-12", "MDS-13"] + [f"IAM-{n:02d}" for n in range(1, 7)],
    5: ["MDS-10", "LOG-02", "LOG-05"],
}
DEFAULT_GATE = 2

PHASE_MINIMUMS = {
    "cybersecurity": [40, 60, 70, 80, 90, 90],
    "privacy": [50, 70, 75, 85, 90, 90],
    "ethics_bias": [40, 50, 70, 85, 90, 90],
    "transparency": [30, 50, 60, 75, 90, 90],
    "explainability": [30, 40, 60, 80, 90, 90],
    "regulations": [50, 60, 70, 80, 90, 90],
    "audit": [30, 50, 65, 80, 90, 90],
    "accountability": [50, 60, 70, 80, 90, 90],
}

GATE_CONTROL_MINIMUMS = [30, 45, 50, 60, 70, 80]

PRIORITY_MIN_RANGES = {
    "critical": [85, 95],
    "high": [75, 85],
    "standard": [60, 75],
    "low": [50, 65],
}


def build() -> dict:
    gate_for: dict[str, int] = {}
    for gate, ids in GATE_ASSIGNMENTS.items():
        for cid in ids:
            gate_for.setdefault(cid, gate)

    named_in_gates = set(gate_for)
    controls = []
    for code, name, count in FAMILIES:
        for n in range(1, count + 1):
            cid = f"{code}-{n:02d}"
            if cid in CRITICAL:
                priority = "critical"
            elif cid in LOW:
                priority = "low"
            elif cid in named_in_gates or cid in TITLES:
                priority = "high"
            else:
                priority = "medium"
            control = {
                "id": cid,
                "family": code,
                "title": TITLES.get(cid, f"{name} Control {n:02d}"),
                "priority": priority,
                "pillars": PILLAR_OVERRIDES.get(cid, FAMILY_PILLARS[code]),
                "required_from_gate": gate_for.get(cid, DEFAULT_GATE),
            }
            if cid in CHECK_BINDINGS:
                control["check_binding"] = CHECK_BINDINGS[cid]
            controls.append(control)

    phases = []
    for phase in range(6):
        phases.append(
            {
                "phase": phase,
                "per_pillar_min": {p: PHASE_MINIMUMS[p][phase] for p, _ in PILLARS},
                "min_cumulative_controls": GATE_CONTROL_MINIMUMS[phase],
            }
        )
    phases.append({"phase": 6, "min_cumulative_controls": GATE_CONTROL_MINIMUMS[-1]})

    return {
        "pillars": [{"id": p, "weight": w} for p, w in PILLARS],
        "families": [{"code": c, "name": n, "declared_count": k} for c, n, k in FAMILIES],
        "controls": controls,
        "phases": phases,
        "priority_min_ranges": PRIORITY_MIN_RANGES,
    }


if __name__ == "__main__":
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(build(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")
