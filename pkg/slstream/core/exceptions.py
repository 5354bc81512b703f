class SlsException(Exception):
    def __init__(self, message: str, exit_code: int = 1):
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


class ConfigurationError(SlsException):
    def __init__(self, message: str = "Invalid configuration"):
        super().__init__(message, exit_code=2)


class DataError(SlsException):
    def __init__(self, message: str = "Invalid data"):
        super().__init__(message, exit_code=3)


class InsufficientDataError(DataError):
    def __init__(self, message: str = "Not enough samples"):
        super().__init__(message)


class NonFiniteSampleError(DataError):
    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"Non-finite sample {value!r} at index {index}")


class DegeneratePilotError(DataError):
    def __init__(self, min_eigenvalue: float, max_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue
        super().__init__(
            f"Pilot Gram matrix is effectively singular "
            f"(min eigenvalue {min_eigenvalue:.3e}, max eigenvalue {max_eigenvalue:.3e})"
        )


class SafeguardAbort(SlsException):
    def __init__(self, message: str = "Block exceeded max_block_len"):
        super().__init__(message, exit_code=4)
