//! Born approximations (in progress).
