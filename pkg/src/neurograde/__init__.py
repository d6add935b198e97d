"""Neonatal EEG background grading toolkit and competition service.

Subpackages:
  eeg_io       EDF/CSV ingestion, montage derivation, labels, subject splits
  dsp          filtering, resampling, segmentation, PSD, envelope, rEEG, RMS
  features     qEEG feature vectors, copula dependence, SVD and image encodings
  grader       linear SVM cascade trained by sequential minimal optimization
  metrics      ordinal confusion-matrix metrics with bootstrap intervals
  competition  submission validation, rate limiting, leaderboards, persistence
  api          REST facade over the competition engine
  cli          batch command-line front end
"""

__version__ = "0.1.0"
