"""kcgen: pattern-based knowledge component discovery from student code,
KC-conditioned worked-example generation, and an evaluation harness."""

__version__ = "0.1.0"
