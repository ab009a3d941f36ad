class CustomException(Exception):
    """Base error; `exit_code` is what the CLI returns when it escapes a command"""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: int = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class ValidationException(CustomException):
    exit_code = 2

    def __init__(self, detail: str = "Validation error"):
        super().__init__(detail)


class NotFoundException(CustomException):
    exit_code = 3

    def __init__(self, detail: str = "Resource not found"):
        super().__init__(detail)


class UnsupportedFormatException(CustomException):
    exit_code = 4

    def __init__(self, detail: str = "Unsupported raster format"):
        super().__init__(detail)


class ModelFileException(CustomException):
    exit_code = 5

    def __init__(self, detail: str = "Malformed model file"):
        super().__init__(detail)


class VersionMismatchException(ModelFileException):
    def __init__(self, found: int, expected: int):
        super().__init__(f"Model file format_version {found} is not supported (expected {expected})")
        self.found = found
        self.expected = expected


class TruncatedFileException(ModelFileException):
    def __init__(self, detail: str = "Model file is truncated"):
        super().__init__(detail)


class ChecksumException(ModelFileException):
    def __init__(self, detail: str = "Model file checksum mismatch"):
        super().__init__(detail)


class DimensionMismatchException(CustomException):
    exit_code = 6

    def __init__(self, detail: str = "Dimension mismatch"):
        super().__init__(detail)


class TrainingException(CustomException):
    exit_code = 7

    def __init__(self, detail: str = "Training failed"):
        super().__init__(detail)


class BackendMismatchException(CustomException):
    exit_code = 8

    def __init__(self, detail: str = "Backend mismatch"):
        super().__init__(detail)
