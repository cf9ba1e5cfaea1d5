"""Command-line lab: generators, solvers, constructions and certificates."""
