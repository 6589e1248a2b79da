class BisbmError(Exception):
    pass


class DimensionError(BisbmError, ValueError):
    pass


class InputError(BisbmError, ValueError):
    pass


class ZeroVarianceError(BisbmError, ValueError):

    def __init__(self, column: str) -> None:
        super().__init__(f"column '{column}' has zero variance")
        self.column = column


class FitError(BisbmError):
    pass


class ConfigError(BisbmError):
    pass


class MissingSettingError(ConfigError):
    pass


class MatrixParseError(BisbmError):

    def __init__(self, path: str, row: int, col: int, cell: str) -> None:
        super().__init__(f"{path}: cannot parse cell '{cell}' at (row={row}, col={col})")
        self.row = row
        self.col = col


class MatrixValidationError(BisbmError):
    pass
