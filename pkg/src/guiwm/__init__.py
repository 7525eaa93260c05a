"""Tooling for mobile GUI world models.

Subpackages:
    trajectory   episode/transition types, action codecs, JSONL IO
    gateway      chat-completions + embedding access with disk cache
    render       HTML -> screenshot harness (built-in and Chromium engines)
    datagen      SFT sample generation pipeline
    evaluate     render-and-judge benchmark runner
    benchbuild   near-duplicate clustering and benchmark curation
    policysim    candidate-action scoring simulations
    analysis     scaling fits, correlations, pareto, figures
    review       adjudication review server
"""

__version__ = "0.1.0"
