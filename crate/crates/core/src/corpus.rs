//! Bundled public-domain text (the opening of Milton's *Paradise Lost*).
//!
//! Used by the toy language model so that experiments run offline.

pub const PARADISE_LOST: &str = include_str!("../data/paradise_lost.txt");

/// Approximate size of the training part; the split lands on the next newline.
pub const TRAIN_BYTES: usize = 200_000;

/// Splits the bundled text into `(train, holdout)` at the first line break
/// after [`TRAIN_BYTES`].
pub fn split() -> (&'static [u8], &'static [u8]) {
    split_at_line(PARADISE_LOST.as_bytes(), TRAIN_BYTES)
}

/// Splits `text` at the first `\n` at or after `at`; the newline stays in the first half.
pub fn split_at_line(text: &[u8], at: usize) -> (&[u8], &[u8]) {
    if at >= text.len() {
        return (text, &[]);
    }
    let cut = text[at..]
        .iter()
        .position(|&b| b == b'\n')
        .map_or(text.len(), |i| at + i + 1);
    text.split_at(cut)
}
