"""protofeat: trainable feature extractors configured from single prototypes.

Two extractor families share one idea - show the system a single prototype
and it configures itself:

* bar-selective image filters (weighted geometric mean of blurred, shifted
  difference-of-Gaussians responses) for delineating elongated structures,
* audio energy-peak constellation features over a gammatone time-frequency
  map for detecting sound events in noise.

Plus feature-subset selection, evaluation metrics, synthetic benchmark
datasets and a CLI.
"""

__version__ = "0.1.0"
