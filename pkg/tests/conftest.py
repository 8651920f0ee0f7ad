# Deterministic property testing: the acceptance gate is part of CI, so
# hypothesis runs derandomized (same examples every run).
from hypothesis import settings

settings.register_profile("ci", derandomize=True)
settings.load_profile("ci")
