//! Versioned result records.
