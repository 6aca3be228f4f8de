//! Spectral tools (in progress).
