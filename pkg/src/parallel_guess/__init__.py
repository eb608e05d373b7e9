"""Expected number of guessing rounds when correct letters are retained."""
