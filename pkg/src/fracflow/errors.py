"""Error type shared by every fracflow module."""


class FracflowError(ValueError):
    """Raised on a violated precondition.

    ``code`` is a stable machine-readable tag (``"SINGULARITY"``,
    ``"GRID_MISMATCH"``, ...) and is also the first token of the message,
    so ``pytest.raises(FracflowError, match="SINGULARITY")`` works.
    """

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)
