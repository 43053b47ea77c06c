"""Exception hierarchy shared across the engine."""


class ActmonError(Exception):
    """Base class for all engine errors."""


# --- dataset ingestion ---

class BadMagic(ActmonError):
    def __init__(self, path, offset, expected, found):
        super().__init__(
            f"{path}: bad magic at offset {offset}: expected {expected}, found {found}"
        )
        self.path = path
        self.offset = offset


class CountMismatch(ActmonError):
    def __init__(self, images_path, labels_path, image_count, label_count):
        super().__init__(
            f"image/label count mismatch: {images_path} has {image_count}, "
            f"{labels_path} has {label_count}"
        )


class TruncatedFile(ActmonError):
    def __init__(self, path, offset, needed):
        super().__init__(f"{path}: truncated at offset {offset}, needed {needed} more bytes")
        self.path = path
        self.offset = offset


class ParseError(ActmonError):
    def __init__(self, path, row, col, detail):
        super().__init__(f"{path}: row {row}, column {col}: {detail}")
        self.row = row
        self.col = col


class ArityMismatch(ActmonError):
    def __init__(self, path, row, expected, found):
        super().__init__(f"{path}: row {row} has {found} fields, expected {expected}")
        self.row = row


class OutOfRangeValue(ActmonError):
    def __init__(self, path, row, col, value):
        super().__init__(f"{path}: row {row}, column {col}: value {value} outside [0, 1]")
        self.row = row
        self.col = col


class EmptyKnownSet(ActmonError):
    pass


# --- network ---

class EmptyDataset(ActmonError):
    pass


class ShapeMismatch(ActmonError):
    pass


class NotAnExtension(ActmonError):
    pass


class MissingClassData(ActmonError):
    pass


# --- projection / clustering ---

class DegenerateData(ActmonError):
    pass


class TooFewPoints(ActmonError):
    pass


# --- monitors ---

class UnknownClass(ActmonError):
    pass


class NotAWarningCase(ActmonError):
    pass


class ClassAlreadyKnown(ActmonError):
    pass


# --- framework / session ---

class StreamExhausted(ActmonError):
    pass


class InsufficientData(ActmonError):
    pass


class MidAdaptation(ActmonError):
    pass


class SnapshotIoError(ActmonError):
    pass


class VersionMismatch(ActmonError):
    pass


class CorruptSnapshot(ActmonError):
    pass


class ConfigError(ActmonError):
    pass
