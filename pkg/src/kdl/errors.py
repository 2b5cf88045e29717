"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid build/run parameters.

    Carries the full list of violations so a config parse can report every
    problem at once instead of failing on the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
