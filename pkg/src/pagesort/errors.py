"""Exception hierarchy shared by all pagesort modules."""


class PagesortError(Exception):
    """Base class for all library errors."""


# --- image decoding ---

class UnreadableFile(PagesortError):
    pass


class UnsupportedFormat(PagesortError):
    pass


class CorruptImage(PagesortError):
    pass


class DegenerateImage(PagesortError):
    pass


# --- geometry / feature extraction ---

class DimensionMismatch(PagesortError):
    pass


class EmptyForeground(PagesortError):
    pass


class ImageTooSmall(PagesortError):
    pass


# --- dataset / training ---

class EmptyDataset(PagesortError):
    pass


class MissingColumn(PagesortError):
    pass


class BadPageNumber(PagesortError):
    pass


class UnknownCategory(PagesortError):
    def __init__(self, category, row_index):
        super().__init__(f"unknown category {category!r} at row {row_index}")
        self.category = category
        self.row_index = row_index


class TooFewCategories(PagesortError):
    pass


# --- model I/O and prediction ---

class VersionMismatch(PagesortError):
    pass


class ChecksumMismatch(PagesortError):
    pass


class InvalidN(PagesortError):
    pass


class MissingFineModel(PagesortError):
    pass


# --- reporting / CLI ---

class LengthMismatch(PagesortError):
    pass


class UnwritablePath(PagesortError):
    pass


class NoImagesFound(PagesortError):
    pass


class MalformedLine(PagesortError):
    def __init__(self, line_number, text):
        super().__init__(f"malformed config line {line_number}: {text!r}")
        self.line_number = line_number


class InvalidValue(PagesortError):
    def __init__(self, key, value):
        super().__init__(f"invalid value for {key}: {value!r}")
        self.key = key
