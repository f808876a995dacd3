"""finexpert: a multi-expert financial assistant framework.

Subpackages:
  fintools   — the four calculation tools
  toolcall   — mid-stream tool-call detection, execution and splicing
  backend    — generation backends (deterministic mock, remote HTTP)
  experts    — expert routing and execution planning
  knowledge  — knowledge base: segmentation, BM25 index, retrieval
  factory    — instruction dataset construction pipelines
  evalkit    — evaluation metrics and benchmark runner
  service    — HTTP service and command-line interface
"""

__version__ = "0.1.0"
