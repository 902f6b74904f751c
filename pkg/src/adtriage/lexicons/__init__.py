"""Packaged seed lexicons; every file is an editable plain-text phrase list."""
