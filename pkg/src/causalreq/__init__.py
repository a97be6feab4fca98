"""causalreq: a workbench for causal language in natural-language requirements.

The package covers the full analysis pipeline: corpus ingestion and
validation, inter-annotator agreement, a causal cue-phrase lexicon,
rule-based and statistical causality detectors, a cross-validation
evaluation harness, domain-stratified prevalence statistics, requirement
life-cycle analytics, and an HTTP annotation service with a file-backed
label store.
"""

__version__ = "0.1.0"
