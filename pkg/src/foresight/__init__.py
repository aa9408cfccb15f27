"""Solvers for extensive games whose players see only part of the tree."""
